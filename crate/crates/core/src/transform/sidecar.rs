//! `SPTP` sidecar holding a [`TransformParams`] block.
//!
//! Fixed 144-byte layout, little-endian:
//!
//! | offset | size | content                                             |
//! |--------|------|-----------------------------------------------------|
//! | 0      | 4    | magic `b"SPTP"`                                     |
//! | 4      | 1    | kind tag (see [`TransformKind::tag`])               |
//! | 5      | 1    | flags: bit 0 box-cox exponent set, bit 1 seed set   |
//! | 6      | 2    | reserved, zero                                      |
//! | 8      | 128  | 16 x f64: kind parameter (gamma or scale, else 0),  |
//! |        |      | a, b, y_min, y_max, mean, std, beta, beta_plus,     |
//! |        |      | pad0, pad1, xi, tau, kappa, lambda, boxcox_lambda   |
//! | 136    | 8    | u64 permutation seed                                |

use std::path::Path;

use super::{TransformKind, TransformParams};
use crate::error::{Error, Result};

pub const SIDECAR_MAGIC: &[u8; 4] = b"SPTP";
pub const SIDECAR_LEN: usize = 144;

const HAS_BOXCOX: u8 = 1;
const HAS_SEED: u8 = 2;

pub fn encode_params(p: &TransformParams) -> Vec<u8> {
    let mut out = Vec::with_capacity(SIDECAR_LEN);
    out.extend_from_slice(SIDECAR_MAGIC);
    out.push(p.kind.tag());
    let mut flags = 0;
    if p.boxcox_lambda.is_some() {
        flags |= HAS_BOXCOX;
    }
    if p.permutation_seed.is_some() || matches!(p.kind, TransformKind::RandomPermutation(_)) {
        flags |= HAS_SEED;
    }
    out.push(flags);
    out.extend_from_slice(&[0, 0]);
    let kind_param = match p.kind {
        TransformKind::Gamma(g) => g,
        TransformKind::Scale(k) => k,
        _ => 0.0,
    };
    let fields = [
        kind_param,
        p.a,
        p.b,
        p.y_min,
        p.y_max,
        p.mean,
        p.std,
        p.beta,
        p.beta_plus,
        p.pad0,
        p.pad1,
        p.xi,
        p.tau,
        p.kappa,
        p.lambda,
        p.boxcox_lambda.unwrap_or(0.0),
    ];
    for f in fields {
        out.extend_from_slice(&f.to_le_bytes());
    }
    let seed = match p.kind {
        TransformKind::RandomPermutation(s) => p.permutation_seed.unwrap_or(s),
        _ => p.permutation_seed.unwrap_or(0),
    };
    out.extend_from_slice(&seed.to_le_bytes());
    debug_assert_eq!(out.len(), SIDECAR_LEN);
    out
}

pub fn decode_params(bytes: &[u8]) -> Result<TransformParams> {
    if bytes.len() != SIDECAR_LEN || &bytes[..4] != SIDECAR_MAGIC {
        return Err(Error::CorruptHeader(format!(
            "expected a {SIDECAR_LEN}-byte SPTP block, got {} bytes",
            bytes.len()
        )));
    }
    let tag = bytes[4];
    let flags = bytes[5];
    let f: Vec<f64> = bytes[8..136]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    let seed = u64::from_le_bytes(bytes[136..144].try_into().unwrap());
    let kind = match tag {
        0 => TransformKind::Norm01,
        1 => TransformKind::ZScoreStd,
        2 => TransformKind::Gamma(f[0]),
        3 => TransformKind::Scale(f[0]),
        4 => TransformKind::Inverse,
        5 => TransformKind::RandomPermutation(seed),
        6 => TransformKind::BoxCox,
        7 => TransformKind::SymPower,
        t => return Err(Error::CorruptHeader(format!("unknown transform tag {t}"))),
    };
    Ok(TransformParams {
        kind,
        a: f[1],
        b: f[2],
        y_min: f[3],
        y_max: f[4],
        mean: f[5],
        std: f[6],
        beta: f[7],
        beta_plus: f[8],
        pad0: f[9],
        pad1: f[10],
        xi: f[11],
        tau: f[12],
        kappa: f[13],
        lambda: f[14],
        boxcox_lambda: (flags & HAS_BOXCOX != 0).then_some(f[15]),
        permutation_seed: (flags & HAS_SEED != 0).then_some(seed),
    })
}

pub fn write_params(path: impl AsRef<Path>, p: &TransformParams) -> Result<()> {
    std::fs::write(path, encode_params(p))?;
    Ok(())
}

pub fn read_params(path: impl AsRef<Path>) -> Result<TransformParams> {
    decode_params(&std::fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_layout() {
        let mut p = TransformParams::identity(TransformKind::Gamma(2.0), -1.0, 1.0);
        p.boxcox_lambda = Some(0.25);
        let bytes = encode_params(&p);
        assert_eq!(bytes.len(), SIDECAR_LEN);
        assert_eq!(&bytes[..6], &[b'S', b'P', b'T', b'P', 2, HAS_BOXCOX]);
        assert_eq!(&bytes[8..16], &2.0f64.to_le_bytes());
        assert_eq!(&bytes[16..24], &(-1.0f64).to_le_bytes());
        assert_eq!(decode_params(&bytes).unwrap(), p);
    }

    #[test]
    fn permutation_seed_survives() {
        let mut p = TransformParams::identity(TransformKind::RandomPermutation(99), 0.0, 1.0);
        p.permutation_seed = Some(99);
        assert_eq!(decode_params(&encode_params(&p)).unwrap(), p);
        assert!(decode_params(&encode_params(&p)[..100]).is_err());
    }
}
