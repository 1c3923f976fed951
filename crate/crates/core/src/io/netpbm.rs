//! Binary PGM (`P5`) and PPM (`P6`) images, 8 bits per sample.

use std::path::Path;

use crate::error::{Error, Result};
use crate::signal::{Modality, Signal};

struct Header {
    channels: usize,
    width: usize,
    height: usize,
    maxval: usize,
    data_offset: usize,
}

fn parse_header(bytes: &[u8]) -> Result<Header> {
    let channels = match bytes.get(..2) {
        Some(b"P5") => 1,
        Some(b"P6") => 3,
        Some([b'P', d]) if d.is_ascii_digit() => {
            return Err(Error::UnsupportedFormat(format!(
                "Netpbm P{} (only P5 and P6 are supported)",
                *d as char
            )))
        }
        Some(_) => return Err(Error::UnsupportedFormat("not a Netpbm file".into())),
        None => return Err(Error::CorruptHeader("file too short".into())),
    };
    let mut pos = 2;
    let mut fields = [0usize; 3];
    for field in &mut fields {
        // whitespace and comments
        loop {
            match bytes.get(pos) {
                Some(c) if c.is_ascii_whitespace() => pos += 1,
                Some(b'#') => {
                    while let Some(&c) = bytes.get(pos) {
                        pos += 1;
                        if c == b'\n' || c == b'\r' {
                            break;
                        }
                    }
                }
                Some(_) => break,
                None => return Err(Error::CorruptHeader("truncated header".into())),
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(u8::is_ascii_digit) {
            pos += 1;
        }
        if start == pos {
            return Err(Error::CorruptHeader("expected a number".into()));
        }
        *field = std::str::from_utf8(&bytes[start..pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::CorruptHeader("number out of range".into()))?;
    }
    // exactly one whitespace byte separates the header from the raster
    match bytes.get(pos) {
        Some(c) if c.is_ascii_whitespace() => pos += 1,
        _ => return Err(Error::CorruptHeader("missing raster separator".into())),
    }
    let [width, height, maxval] = fields;
    if width == 0 || height == 0 {
        return Err(Error::CorruptHeader("zero image extent".into()));
    }
    if maxval == 0 || maxval > 255 {
        return Err(Error::UnsupportedFormat(format!(
            "maxval {maxval} (only 8-bit rasters are supported)"
        )));
    }
    Ok(Header {
        channels,
        width,
        height,
        maxval,
        data_offset: pos,
    })
}

/// Decodes a P5/P6 image to `[height, width, channels]` samples in `[0, 1]`.
pub fn decode_image(bytes: &[u8]) -> Result<Signal> {
    let h = parse_header(bytes)?;
    let count = h.width * h.height * h.channels;
    let raster = bytes
        .get(h.data_offset..h.data_offset + count)
        .ok_or_else(|| Error::CorruptHeader("raster is truncated".into()))?;
    let scale = h.maxval as f64;
    let data = raster.iter().map(|&b| (b as f64 / scale).min(1.0)).collect();
    Signal::new(data, vec![h.height, h.width, h.channels], Modality::Image2D)
}

/// Encodes a 1- or 3-channel image, clamping to `[0, 1]` and rounding to 8 bits.
pub fn encode_image(s: &Signal) -> Result<Vec<u8>> {
    let (h, w, c) = match *s.shape() {
        [h, w, c] if s.modality() == Modality::Image2D => (h, w, c),
        [h, w] => (h, w, 1),
        _ => {
            return Err(Error::UnsupportedFormat(format!(
                "cannot write shape {:?} as an image",
                s.shape()
            )))
        }
    };
    let magic = match c {
        1 => "P5",
        3 => "P6",
        _ => {
            return Err(Error::UnsupportedFormat(format!(
                "{c} channels (need 1 or 3)"
            )))
        }
    };
    let mut out = format!("{magic}\n{w} {h}\n255\n").into_bytes();
    out.extend(s.data().iter().map(|&v| (v.clamp(0.0, 1.0) * 255.0).round() as u8));
    Ok(out)
}

pub fn load_image(path: impl AsRef<Path>) -> Result<Signal> {
    decode_image(&std::fs::read(path)?)
}

pub fn save_image(s: &Signal, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, encode_image(s)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn p5_bytes_map_to_unit_interval() {
        let mut bytes = b"P5\n# comment\n2 2\n255\n".to_vec();
        bytes.extend_from_slice(&[0, 128, 255, 64]);
        let s = decode_image(&bytes).unwrap();
        assert_eq!(s.shape(), &[2, 2, 1]);
        assert_eq!(s.data(), &[0.0, 128.0 / 255.0, 1.0, 64.0 / 255.0]);
        assert_eq!(encode_image(&s).unwrap()[encode_image(&s).unwrap().len() - 4..], [0, 128, 255, 64]);
    }

    #[test]
    fn errors() {
        let mut bytes = b"P5 2 2 255\n".to_vec();
        bytes.extend_from_slice(&[1, 2, 3]);
        assert!(matches!(decode_image(&bytes), Err(Error::CorruptHeader(_))));
        assert!(matches!(decode_image(b"P5 2"), Err(Error::CorruptHeader(_))));
        assert!(matches!(decode_image(b"P2 1 1 255\n0"), Err(Error::UnsupportedFormat(_))));
        assert!(matches!(decode_image(b"\x89PNG...."), Err(Error::UnsupportedFormat(_))));
        assert!(matches!(decode_image(b"P5 1 1 65535\n\0\0"), Err(Error::UnsupportedFormat(_))));
    }

    #[test]
    fn ppm_round_trip() {
        let data: Vec<f64> = (0..2 * 3 * 3).map(|i| i as f64 / 17.0).collect();
        let s = Signal::image(data, 2, 3, 3).unwrap();
        let back = decode_image(&encode_image(&s).unwrap()).unwrap();
        assert_eq!(back.shape(), s.shape());
        for (a, b) in back.data().iter().zip(s.data()) {
            assert!((a - b).abs() <= 1.0 / 510.0 + 1e-12);
        }
    }

    proptest! {
        #[test]
        fn quantisation_error_is_half_a_level(v in prop::collection::vec(0.0f64..=1.0, 12)) {
            let s = Signal::image(v, 3, 4, 1).unwrap();
            let back = decode_image(&encode_image(&s).unwrap()).unwrap();
            for (a, b) in back.data().iter().zip(s.data()) {
                prop_assert!((a - b).abs() <= 1.0 / 510.0 + 1e-12);
            }
        }
    }
}
