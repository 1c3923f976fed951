//! Seeded synthetic signals.
//!
//! Distribution-driven kinds (`NormalClipped`, `Lognormal`) draw i.i.d.
//! samples and then place them on the grid in the rank order of a smooth
//! random field, so the marginal distribution is exactly the drawn set while
//! the spatial structure depends only on the seed and shape. Two specs that
//! differ only in distribution parameters therefore share the same layout.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution, LogNormal, Normal};

use crate::error::{Error, Result};
use crate::signal::{Modality, Signal};
use crate::stats::skewness_of;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SyntheticKind {
    /// Normal draws truncated to `[-1, 1]` (rejection), then min-max scaled to `[-1, 1]`.
    NormalClipped { mu: f64, sigma: f64 },
    Lognormal { mu: f64, sigma: f64 },
    /// Blocky glyphs in `levels - 1` ink intensities on a flat background.
    TextLike { levels: usize },
    /// Diagonal ramp over `[0, 1]`.
    GradientImage,
    ConstantImage(f64),
    /// Dead-leaves occlusion model with textured leaves: a natural-image surrogate.
    DeadLeaves,
    /// Harmonic tone plus a formant-shaped voiced part under a syllabic envelope.
    SpeechLike { sample_rate: u32 },
    /// Gaussian blobs drifting over the frames of a `[frames, h, w]` volume.
    MovingBlobs,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub kind: SyntheticKind,
    /// Coordinate extents: `[n]`, `[h, w]` or `[d, h, w]`.
    pub shape: Vec<usize>,
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn new(kind: SyntheticKind, shape: &[usize], seed: u64) -> Self {
        Self {
            kind,
            shape: shape.to_vec(),
            seed,
        }
    }

    /// Stable name used in reports, e.g. `normal_mu0.5_sd0.4_64x64_s1`.
    pub fn label(&self) -> String {
        let kind = match self.kind {
            SyntheticKind::NormalClipped { mu, sigma } => format!("normal_mu{mu}_sd{sigma}"),
            SyntheticKind::Lognormal { mu, sigma } => format!("lognormal_mu{mu}_sd{sigma}"),
            SyntheticKind::TextLike { levels } => format!("text{levels}"),
            SyntheticKind::GradientImage => "gradient".into(),
            SyntheticKind::ConstantImage(v) => format!("constant{v}"),
            SyntheticKind::DeadLeaves => "leaves".into(),
            SyntheticKind::SpeechLike { sample_rate } => format!("speech{sample_rate}hz"),
            SyntheticKind::MovingBlobs => "blobs".into(),
        };
        let shape: Vec<String> = self.shape.iter().map(usize::to_string).collect();
        format!("{kind}_{}_s{}", shape.join("x"), self.seed)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.to_string()));
        if self.shape.is_empty() || self.shape.len() > 3 || self.shape.contains(&0) {
            return bad("shape must have 1 to 3 positive extents");
        }
        match self.kind {
            SyntheticKind::NormalClipped { sigma, mu } | SyntheticKind::Lognormal { sigma, mu } => {
                if !(sigma > 0.0) || !mu.is_finite() {
                    return bad("sigma must be positive and mu finite");
                }
            }
            SyntheticKind::TextLike { levels } => {
                if levels < 2 {
                    return bad("text-like images need at least 2 levels");
                }
                if self.shape.len() != 2 {
                    return bad("text-like images are 2-D");
                }
            }
            SyntheticKind::GradientImage | SyntheticKind::DeadLeaves => {
                if self.shape.len() != 2 {
                    return bad("image kinds are 2-D");
                }
            }
            SyntheticKind::ConstantImage(v) => {
                if !v.is_finite() {
                    return bad("constant must be finite");
                }
            }
            SyntheticKind::SpeechLike { sample_rate } => {
                if self.shape.len() != 1 || sample_rate == 0 {
                    return bad("speech-like audio is 1-D with a positive rate");
                }
            }
            SyntheticKind::MovingBlobs => {
                if self.shape.len() != 3 {
                    return bad("moving blobs are 3-D");
                }
            }
        }
        Ok(())
    }
}

/// A generated signal and its sample skewness (0 when constant).
#[derive(Debug, Clone)]
pub struct Generated {
    pub signal: Signal,
    pub skewness: f64,
}

pub fn generate(spec: &SyntheticSpec) -> Result<Generated> {
    spec.validate()?;
    let n: usize = spec.shape.iter().product();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let data = match spec.kind {
        SyntheticKind::NormalClipped { mu, sigma } => {
            let normal = Normal::new(mu, sigma).map_err(|e| Error::InvalidParameter(e.to_string()))?;
            let mut draws = Vec::with_capacity(n);
            let mut attempts = 0usize;
            while draws.len() < n {
                let v = normal.sample(&mut rng);
                attempts += 1;
                if (-1.0..=1.0).contains(&v) {
                    draws.push(v);
                } else if attempts > 1000 * n + 10_000 {
                    return Err(Error::InvalidParameter(format!(
                        "N({mu}, {sigma}) has almost no mass in [-1, 1]"
                    )));
                }
            }
            let (lo, hi) = draws
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| (l.min(v), h.max(v)));
            if hi > lo {
                draws.iter_mut().for_each(|v| *v = -1.0 + 2.0 * (*v - lo) / (hi - lo));
            }
            arrange_by_field(draws, &spec.shape, spec.seed)
        }
        SyntheticKind::Lognormal { mu, sigma } => {
            let d = LogNormal::new(mu, sigma).map_err(|e| Error::InvalidParameter(e.to_string()))?;
            let draws: Vec<f64> = (0..n).map(|_| d.sample(&mut rng)).collect();
            arrange_by_field(draws, &spec.shape, spec.seed)
        }
        SyntheticKind::TextLike { levels } => text_like(spec.shape[0], spec.shape[1], levels, &mut rng),
        SyntheticKind::GradientImage => {
            let (h, w) = (spec.shape[0], spec.shape[1]);
            let denom = ((h - 1) + (w - 1)).max(1) as f64;
            (0..h * w).map(|i| ((i / w) + (i % w)) as f64 / denom).collect()
        }
        SyntheticKind::ConstantImage(v) => vec![v; n],
        SyntheticKind::DeadLeaves => dead_leaves(spec.shape[0], spec.shape[1], &mut rng)?,
        SyntheticKind::SpeechLike { sample_rate } => speech_like(n, sample_rate, &mut rng),
        SyntheticKind::MovingBlobs => moving_blobs(&spec.shape, &mut rng),
    };
    let signal = match spec.shape.len() {
        1 => {
            let modality = match spec.kind {
                SyntheticKind::SpeechLike { .. } => Modality::Audio1D,
                _ => Modality::Synthetic,
            };
            Signal::new(data, spec.shape.clone(), modality)?
        }
        2 => Signal::new(data, vec![spec.shape[0], spec.shape[1], 1], Modality::Image2D)?,
        _ => Signal::new(
            data,
            vec![spec.shape[0], spec.shape[1], spec.shape[2], 1],
            Modality::Volume3D,
        )?,
    };
    let skewness = skewness_of(signal.data()).unwrap_or(0.0);
    Ok(Generated { signal, skewness })
}

/// Sum of random plane waves over the unit cube, amplitude falling with frequency.
fn smooth_field(shape: &[usize], rng: &mut ChaCha8Rng) -> Vec<f64> {
    const WAVES: usize = 64;
    const MAX_FREQ: f64 = 8.0;
    let dims = shape.len();
    let waves: Vec<(Vec<f64>, f64, f64)> = (0..WAVES)
        .map(|_| {
            let f: Vec<f64> = (0..dims).map(|_| rng.random_range(-MAX_FREQ..MAX_FREQ)).collect();
            let norm = f.iter().map(|v| v * v).sum::<f64>().sqrt();
            let phase = rng.random_range(0.0..2.0 * PI);
            (f, phase, 1.0 / (1.0 + norm))
        })
        .collect();
    let total: usize = shape.iter().product();
    let mut out = Vec::with_capacity(total);
    let mut pos = vec![0.0; dims];
    for flat in 0..total {
        let mut rem = flat;
        for d in (0..dims).rev() {
            pos[d] = (rem % shape[d]) as f64 / shape[d] as f64;
            rem /= shape[d];
        }
        let v: f64 = waves
            .iter()
            .map(|(f, phase, amp)| {
                let arg: f64 = f.iter().zip(&pos).map(|(a, b)| a * b).sum();
                amp * (2.0 * PI * arg + phase).cos()
            })
            .sum();
        out.push(v);
    }
    out
}

fn arrange_by_field(mut draws: Vec<f64>, shape: &[usize], seed: u64) -> Vec<f64> {
    // separate stream so the layout does not depend on how many draws were rejected
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    let field = smooth_field(shape, &mut rng);
    let mut order: Vec<usize> = (0..field.len()).collect();
    order.sort_by(|&a, &b| field[a].total_cmp(&field[b]).then(a.cmp(&b)));
    draws.sort_by(f64::total_cmp);
    let mut out = vec![0.0; draws.len()];
    for (rank, &pos) in order.iter().enumerate() {
        out[pos] = draws[rank];
    }
    out
}

fn text_like(h: usize, w: usize, levels: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    const GLYPH_W: usize = 5;
    const GLYPH_H: usize = 7;
    let background = 1.0;
    // distinct ink levels, darkest first
    let inks: Vec<f64> = (0..levels - 1)
        .map(|i| {
            let base = 0.05 + 0.7 * i as f64 / (levels - 1).max(1) as f64;
            base + rng.random_range(0.0..0.05)
        })
        .collect();
    let mut img = vec![background; h * w];
    let mut y = 1;
    let mut word = 0usize;
    while y + GLYPH_H < h {
        let mut x = 1;
        while x + GLYPH_W < w {
            let letters = rng.random_range(2..6usize);
            let ink = inks[word % inks.len()];
            word += 1;
            for _ in 0..letters {
                if x + GLYPH_W >= w {
                    break;
                }
                let glyph: u64 = rng.random();
                for gy in 0..GLYPH_H {
                    for gx in 0..GLYPH_W {
                        let bit = (glyph >> (gy * GLYPH_W + gx)) & 1;
                        // stems on the outer columns make the blobs read as letters
                        if bit == 1 || (gx == 0 && gy > 0) {
                            img[(y + gy) * w + x + gx] = ink;
                        }
                    }
                }
                x += GLYPH_W + 1;
            }
            x += GLYPH_W - 1;
        }
        y += GLYPH_H + 2;
    }
    img
}

fn dead_leaves(h: usize, w: usize, rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
    let tone = Beta::new(2.0, 3.0).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let size = h.max(w) as f64;
    let (r_min, r_max) = (size / 64.0, size / 3.0);
    let mut img = vec![f64::NAN; h * w];
    let mut covered = 0usize;
    // front to back: each leaf only paints pixels no earlier leaf claimed
    for _ in 0..20_000 {
        if covered == h * w {
            break;
        }
        // radius density proportional to r^-3
        let u: f64 = rng.random();
        let r = 1.0 / ((1.0 - u) / (r_min * r_min) + u / (r_max * r_max)).sqrt();
        let cx = rng.random_range(-r..w as f64 + r);
        let cy = rng.random_range(-r..h as f64 + r);
        let base = tone.sample(rng);
        let (gx, gy) = (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let stripe = rng.random_range(0.0..0.06);
        let freq = rng.random_range(0.2..1.2);
        let angle = rng.random_range(0.0..PI);
        let (sa, ca) = angle.sin_cos();
        let y0 = (cy - r).floor().max(0.0) as usize;
        let y1 = ((cy + r).ceil() as usize).min(h);
        let x0 = (cx - r).floor().max(0.0) as usize;
        let x1 = ((cx + r).ceil() as usize).min(w);
        for y in y0..y1 {
            for x in x0..x1 {
                let (dx, dy) = (x as f64 + 0.5 - cx, y as f64 + 0.5 - cy);
                if dx * dx + dy * dy > r * r || !img[y * w + x].is_nan() {
                    continue;
                }
                let shade = 0.08 * (gx * dx + gy * dy) / r;
                let texture = stripe * (freq * (ca * dx + sa * dy)).sin();
                img[y * w + x] = (base + shade + texture).clamp(0.0, 1.0);
                covered += 1;
            }
        }
    }
    let fill = 0.4;
    Ok(img.into_iter().map(|v| if v.is_nan() { fill } else { v }).collect())
}

fn speech_like(n: usize, rate: u32, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let rate = rate as f64;
    let tone_hz = rng.random_range(180.0..260.0);
    let f0 = rng.random_range(100.0..140.0);
    let formants = [
        rng.random_range(500.0..800.0),
        rng.random_range(1100.0..1700.0),
        rng.random_range(2300.0..2900.0),
    ];
    let syllable_hz = rng.random_range(3.0..5.0);
    let noise = Normal::new(0.0, 0.01).unwrap();
    (0..n)
        .map(|i| {
            let t = i as f64 / rate;
            let envelope = (PI * syllable_hz * t).sin().powi(2);
            let mut voiced = 0.0;
            let mut k = 1.0;
            while k * f0 < 3500.0 && k * f0 < rate / 2.0 {
                let f = k * f0;
                let gain: f64 = formants
                    .iter()
                    .map(|&fm| 1.0 / (1.0 + ((f - fm) / 120.0).powi(2)))
                    .sum();
                voiced += gain * (2.0 * PI * f * t).sin() / k.sqrt();
                k += 1.0;
            }
            0.25 * (2.0 * PI * tone_hz * t).sin() + 0.12 * envelope * voiced + noise.sample(rng)
        })
        .map(|v: f64| v.clamp(-0.99, 0.99))
        .collect()
}

fn moving_blobs(shape: &[usize], rng: &mut ChaCha8Rng) -> Vec<f64> {
    let (frames, h, w) = (shape[0], shape[1], shape[2]);
    let blobs: Vec<[f64; 6]> = (0..4)
        .map(|_| {
            [
                rng.random_range(0.2..0.8),
                rng.random_range(0.2..0.8),
                rng.random_range(-0.3..0.3),
                rng.random_range(-0.3..0.3),
                rng.random_range(0.08..0.2),
                rng.random_range(0.3..0.7),
            ]
        })
        .collect();
    let mut out = Vec::with_capacity(frames * h * w);
    for f in 0..frames {
        let t = f as f64 / frames.max(1) as f64;
        for y in 0..h {
            for x in 0..w {
                let (px, py) = (x as f64 / w as f64, y as f64 / h as f64);
                let v: f64 = blobs
                    .iter()
                    .map(|b| {
                        let (dx, dy) = (px - (b[0] + b[2] * t), py - (b[1] + b[3] * t));
                        b[5] * (-(dx * dx + dy * dy) / (2.0 * b[4] * b[4])).exp()
                    })
                    .sum();
                out.push((0.1 + v).min(1.0));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normal_at_zero_is_symmetric() {
        let g = generate(&SyntheticSpec::new(
            SyntheticKind::NormalClipped { mu: 0.0, sigma: 0.5 },
            &[64, 64],
            1,
        ))
        .unwrap();
        assert!(g.skewness.abs() < 0.05, "{}", g.skewness);
        let (lo, hi) = g.signal.min_max();
        assert_eq!((lo, hi), (-1.0, 1.0));
    }

    #[test]
    fn lognormal_skew_matches_closed_form() {
        let s2: f64 = 0.25;
        let expected = (s2.exp() + 2.0) * (s2.exp() - 1.0).sqrt();
        let g = generate(&SyntheticSpec::new(
            SyntheticKind::Lognormal { mu: 0.0, sigma: 0.5 },
            &[400, 400],
            5,
        ))
        .unwrap();
        assert!((g.skewness - expected).abs() < 0.1, "{} vs {expected}", g.skewness);
    }

    #[test]
    fn text_like_has_few_levels() {
        let g = generate(&SyntheticSpec::new(SyntheticKind::TextLike { levels: 4 }, &[64, 64], 3)).unwrap();
        let mut vals: Vec<f64> = g.signal.data().to_vec();
        vals.sort_by(f64::total_cmp);
        vals.dedup();
        assert!(vals.len() <= 4 && vals.len() >= 2, "{vals:?}");
    }

    #[test]
    fn deterministic_in_seed() {
        for kind in [
            SyntheticKind::DeadLeaves,
            SyntheticKind::TextLike { levels: 3 },
            SyntheticKind::NormalClipped { mu: 0.3, sigma: 0.4 },
        ] {
            let a = generate(&SyntheticSpec::new(kind, &[32, 32], 9)).unwrap();
            let b = generate(&SyntheticSpec::new(kind, &[32, 32], 9)).unwrap();
            let c = generate(&SyntheticSpec::new(kind, &[32, 32], 10)).unwrap();
            assert_eq!(a.signal, b.signal);
            assert_ne!(a.signal, c.signal);
        }
    }

    #[test]
    fn shared_layout_across_distributions() {
        let a = generate(&SyntheticSpec::new(SyntheticKind::NormalClipped { mu: 0.0, sigma: 0.5 }, &[16, 16], 4)).unwrap();
        let b = generate(&SyntheticSpec::new(SyntheticKind::NormalClipped { mu: 0.8, sigma: 0.5 }, &[16, 16], 4)).unwrap();
        let rank = |s: &Signal| {
            let mut idx: Vec<usize> = (0..s.len()).collect();
            idx.sort_by(|&i, &j| s.data()[i].total_cmp(&s.data()[j]));
            idx
        };
        assert_eq!(rank(&a.signal), rank(&b.signal));
    }

    #[test]
    fn rejects_invalid_specs() {
        assert!(generate(&SyntheticSpec::new(SyntheticKind::TextLike { levels: 1 }, &[8, 8], 0)).is_err());
        assert!(generate(&SyntheticSpec::new(SyntheticKind::Lognormal { mu: 0.0, sigma: 0.0 }, &[8], 0)).is_err());
    }
}
