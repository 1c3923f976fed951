//! Mono PCM16 WAV files.

use std::path::Path;

use crate::error::{Error, Result};
use crate::signal::{Modality, Signal};

/// Decoded audio with its sample rate.
#[derive(Debug, Clone, PartialEq)]
pub struct Audio {
    pub signal: Signal,
    pub sample_rate: u32,
}

impl Audio {
    /// First `seconds` of the clip (the whole clip if shorter).
    pub fn crop_seconds(&self, seconds: f64) -> Result<Audio> {
        let keep = ((seconds * self.sample_rate as f64).floor() as usize).min(self.signal.len());
        let keep = keep.max(1);
        let data = self.signal.data()[..keep].to_vec();
        Ok(Audio {
            signal: Signal::new(data, vec![keep], Modality::Audio1D)?,
            sample_rate: self.sample_rate,
        })
    }
}

fn u16_at(b: &[u8], i: usize) -> u16 {
    u16::from_le_bytes([b[i], b[i + 1]])
}

fn u32_at(b: &[u8], i: usize) -> u32 {
    u32::from_le_bytes([b[i], b[i + 1], b[i + 2], b[i + 3]])
}

/// Samples map as `i / 32768`, so they lie in `[-1, 1)`.
pub fn decode_wav(bytes: &[u8]) -> Result<Audio> {
    if bytes.len() < 12 || &bytes[..4] != b"RIFF" || &bytes[8..12] != b"WAVE" {
        return Err(Error::UnsupportedFormat("not a RIFF/WAVE file".into()));
    }
    let mut pos = 12;
    let mut format: Option<(u16, u16, u32, u16)> = None;
    while pos + 8 <= bytes.len() {
        let id = &bytes[pos..pos + 4];
        let size = u32_at(bytes, pos + 4) as usize;
        let body = pos + 8;
        let end = body
            .checked_add(size)
            .filter(|&e| e <= bytes.len())
            .ok_or_else(|| Error::CorruptHeader("chunk runs past end of file".into()))?;
        match id {
            b"fmt " => {
                if size < 16 {
                    return Err(Error::CorruptHeader("fmt chunk too short".into()));
                }
                format = Some((
                    u16_at(bytes, body),
                    u16_at(bytes, body + 2),
                    u32_at(bytes, body + 4),
                    u16_at(bytes, body + 14),
                ));
            }
            b"data" => {
                let (tag, channels, rate, bits) =
                    format.ok_or_else(|| Error::CorruptHeader("data before fmt chunk".into()))?;
                if tag != 1 || bits != 16 || channels != 1 {
                    return Err(Error::UnsupportedEncoding(format!(
                        "format {tag}, {channels} channels, {bits} bits (need PCM16 mono)"
                    )));
                }
                let data: Vec<f64> = bytes[body..end]
                    .chunks_exact(2)
                    .map(|c| i16::from_le_bytes([c[0], c[1]]) as f64 / 32768.0)
                    .collect();
                if data.is_empty() {
                    return Err(Error::EmptySignal);
                }
                let n = data.len();
                return Ok(Audio {
                    signal: Signal::new(data, vec![n], Modality::Audio1D)?,
                    sample_rate: rate,
                });
            }
            _ => {}
        }
        pos = end + (size & 1);
    }
    Err(Error::CorruptHeader("no data chunk".into()))
}

/// Writes PCM16 mono, rounding `v * 32768` and saturating to the i16 range.
pub fn encode_wav(signal: &Signal, sample_rate: u32) -> Vec<u8> {
    let n = signal.len();
    let data_len = (n * 2) as u32;
    let mut out = Vec::with_capacity(44 + n * 2);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&(36 + data_len).to_le_bytes());
    out.extend_from_slice(b"WAVEfmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&1u16.to_le_bytes());
    out.extend_from_slice(&1u16.to_le_bytes());
    out.extend_from_slice(&sample_rate.to_le_bytes());
    out.extend_from_slice(&(sample_rate * 2).to_le_bytes());
    out.extend_from_slice(&2u16.to_le_bytes());
    out.extend_from_slice(&16u16.to_le_bytes());
    out.extend_from_slice(b"data");
    out.extend_from_slice(&data_len.to_le_bytes());
    for &v in signal.data() {
        let q = (v * 32768.0).round().clamp(-32768.0, 32767.0) as i16;
        out.extend_from_slice(&q.to_le_bytes());
    }
    out
}

pub fn load_wav(path: impl AsRef<Path>) -> Result<Audio> {
    decode_wav(&std::fs::read(path)?)
}

pub fn save_wav(audio: &Audio, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, encode_wav(&audio.signal, audio.sample_rate))?;
    Ok(())
}
