//! `SPT1` binary tensor container.
//!
//! Layout (all integers and floats little-endian):
//!
//! | offset | size      | content                         |
//! |--------|-----------|---------------------------------|
//! | 0      | 4         | magic `b"SPT1"`                 |
//! | 4      | 1         | rank `r` (u8, at least 1)       |
//! | 5      | 8 r       | extents, u64 each               |
//! | 5 + 8r | 8 prod(e) | samples, IEEE-754 binary64 each |

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::signal::{Modality, Signal};

pub const TENSOR_MAGIC: &[u8; 4] = b"SPT1";

pub fn encode_tensor(s: &Signal) -> Vec<u8> {
    let mut out = Vec::with_capacity(5 + 8 * s.shape().len() + 8 * s.len());
    out.extend_from_slice(TENSOR_MAGIC);
    out.push(s.shape().len() as u8);
    for &e in s.shape() {
        out.extend_from_slice(&(e as u64).to_le_bytes());
    }
    for &v in s.data() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

/// Decodes a container. The modality is not stored, so it is guessed from
/// the rank (1: audio, 3: image, 4: volume, otherwise synthetic).
pub fn decode_tensor(bytes: &[u8]) -> Result<Signal> {
    let (shape, data) = decode_raw(bytes)?;
    let modality = match shape.len() {
        1 => Modality::Audio1D,
        3 => Modality::Image2D,
        4 => Modality::Volume3D,
        _ => Modality::Synthetic,
    };
    Signal::new(data, shape, modality)
}

pub fn decode_tensor_as(bytes: &[u8], modality: Modality) -> Result<Signal> {
    let (shape, data) = decode_raw(bytes)?;
    Signal::new(data, shape, modality)
}

fn decode_raw(bytes: &[u8]) -> Result<(Vec<usize>, Vec<f64>)> {
    if bytes.len() < 5 || &bytes[..4] != TENSOR_MAGIC {
        return Err(Error::CorruptHeader("missing SPT1 magic".into()));
    }
    let rank = bytes[4] as usize;
    if rank == 0 {
        return Err(Error::CorruptHeader("rank 0".into()));
    }
    let header = 5 + 8 * rank;
    if bytes.len() < header {
        return Err(Error::CorruptHeader("truncated extents".into()));
    }
    let shape: Vec<usize> = bytes[5..header]
        .chunks_exact(8)
        .map(|c| u64::from_le_bytes(c.try_into().unwrap()) as usize)
        .collect();
    let count = shape
        .iter()
        .try_fold(1usize, |acc, &e| acc.checked_mul(e))
        .ok_or_else(|| Error::CorruptHeader("extent product overflows".into()))?;
    let expected = count
        .checked_mul(8)
        .and_then(|b| b.checked_add(header))
        .ok_or_else(|| Error::CorruptHeader("extent product overflows".into()))?;
    if bytes.len() != expected {
        return Err(Error::CorruptHeader(format!(
            "expected {expected} bytes, found {}",
            bytes.len()
        )));
    }
    let data = bytes[header..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok((shape, data))
}

pub fn write_tensor(path: impl AsRef<Path>, s: &Signal) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(&encode_tensor(s))?;
    Ok(())
}

pub fn read_tensor(path: impl AsRef<Path>) -> Result<Signal> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    decode_tensor(&bytes)
}
