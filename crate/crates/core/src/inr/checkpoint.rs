//! `SPTN` network checkpoints: magic, config block, then the `f64` parameters.
//!
//! Layout (little-endian): `b"SPTN"`, `u32` hidden layers, `u32` width,
//! `u32` in_dim, `u32` out_dim, `u8` activation tag, 3 reserved bytes,
//! `f64` omega0, `f64` finer_bias_k, `u64` seed, `u64` optimizer step,
//! `u64` parameter count, parameters. Adam moments are not stored.

use std::fs;
use std::path::Path;

use super::network::{Activation, NetworkConfig, NetworkState};
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"SPTN";
const HEADER: usize = 4 + 16 + 4 + 8 * 5;

pub fn encode_network(state: &NetworkState) -> Vec<u8> {
    let c = state.config();
    let mut out = Vec::with_capacity(HEADER + 8 * state.params().len());
    out.extend_from_slice(MAGIC);
    for v in [c.hidden_layers, c.width, c.in_dim, c.out_dim] {
        out.extend_from_slice(&(v as u32).to_le_bytes());
    }
    out.extend_from_slice(&[c.activation.tag(), 0, 0, 0]);
    out.extend_from_slice(&c.omega0.to_le_bytes());
    out.extend_from_slice(&c.finer_bias_k.to_le_bytes());
    out.extend_from_slice(&c.seed.to_le_bytes());
    out.extend_from_slice(&state.step().to_le_bytes());
    out.extend_from_slice(&(state.params().len() as u64).to_le_bytes());
    for p in state.params() {
        out.extend_from_slice(&p.to_le_bytes());
    }
    out
}

pub fn decode_network(bytes: &[u8]) -> Result<NetworkState> {
    let corrupt = |m: &str| Error::CorruptHeader(m.to_string());
    if bytes.len() < 4 || &bytes[..4] != MAGIC {
        return Err(Error::UnsupportedFormat("missing SPTN magic".into()));
    }
    if bytes.len() < HEADER {
        return Err(corrupt("checkpoint header truncated"));
    }
    let u32_at = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().unwrap()) as usize;
    let u64_at = |i: usize| u64::from_le_bytes(bytes[i..i + 8].try_into().unwrap());
    let f64_at = |i: usize| f64::from_bits(u64_at(i));
    let activation = Activation::from_tag(bytes[20]).ok_or_else(|| corrupt("unknown activation"))?;
    let config = NetworkConfig {
        hidden_layers: u32_at(4),
        width: u32_at(8),
        in_dim: u32_at(12),
        out_dim: u32_at(16),
        activation,
        omega0: f64_at(24),
        finer_bias_k: f64_at(32),
        seed: u64_at(40),
    };
    config.validate().map_err(|e| corrupt(&e.to_string()))?;
    let step = u64_at(48);
    let count = u64_at(56) as usize;
    if count != config.param_count() {
        return Err(corrupt("parameter count does not match the config"));
    }
    let body = &bytes[HEADER..];
    if body.len() != 8 * count {
        return Err(corrupt("parameter blob has the wrong length"));
    }
    let params = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    let mut state = NetworkState::from_params(config, params);
    state.step = step;
    Ok(state)
}

pub fn save_network(state: &NetworkState, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, encode_network(state))?;
    Ok(())
}

pub fn load_network(path: impl AsRef<Path>) -> Result<NetworkState> {
    decode_network(&fs::read(path)?)
}
