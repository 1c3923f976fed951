//! Reconstruction quality: MSE, PSNR, SSIM and SI-SNR.

use crate::error::{Error, Result};
use crate::signal::{Modality, Signal};

/// Value reported for a perfect reconstruction.
pub const DB_CAP: f64 = 200.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QualityReport {
    pub mse: f64,
    pub psnr: f64,
    pub ssim: Option<f64>,
    pub si_snr: Option<f64>,
}

impl QualityReport {
    /// PSNR always; SSIM for images large enough; SI-SNR for audio.
    pub fn evaluate(pred: &Signal, truth: &Signal, peak: f64) -> Result<Self> {
        let mse = mse(pred, truth)?;
        let psnr = psnr_from_mse(mse, peak);
        let ssim = match truth.modality() {
            Modality::Image2D => ssim(pred, truth).ok(),
            _ => None,
        };
        let si_snr = match truth.modality() {
            Modality::Audio1D => si_snr(pred, truth).ok(),
            _ => None,
        };
        Ok(Self {
            mse,
            psnr,
            ssim,
            si_snr,
        })
    }
}

pub fn mse(pred: &Signal, truth: &Signal) -> Result<f64> {
    pred.check_same_shape(truth)?;
    Ok(crate::inr::mean_sq_diff(pred.data(), truth.data()))
}

pub fn psnr_from_mse(mse: f64, peak: f64) -> f64 {
    if mse <= 0.0 {
        return DB_CAP;
    }
    (10.0 * (peak * peak / mse).log10()).min(DB_CAP)
}

/// `10 log10(peak^2 / mse)`, capped at [`DB_CAP`].
pub fn psnr(pred: &Signal, truth: &Signal, peak: f64) -> Result<f64> {
    if !(peak > 0.0) {
        return Err(Error::InvalidParameter(format!("peak must be positive, got {peak}")));
    }
    Ok(psnr_from_mse(mse(pred, truth)?, peak))
}

const SSIM_WINDOW: usize = 11;
const SSIM_SIGMA: f64 = 1.5;
const SSIM_K1: f64 = 0.01;
const SSIM_K2: f64 = 0.03;

fn gaussian_kernel() -> [f64; SSIM_WINDOW] {
    let mut k = [0.0; SSIM_WINDOW];
    let c = (SSIM_WINDOW / 2) as f64;
    for (i, w) in k.iter_mut().enumerate() {
        let d = i as f64 - c;
        *w = (-d * d / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp();
    }
    let s: f64 = k.iter().sum();
    k.iter_mut().for_each(|w| *w /= s);
    k
}

/// Separable "valid" Gaussian filter of an `h x w` plane.
fn filter(plane: &[f64], h: usize, w: usize, k: &[f64; SSIM_WINDOW]) -> (Vec<f64>, usize, usize) {
    let (oh, ow) = (h + 1 - SSIM_WINDOW, w + 1 - SSIM_WINDOW);
    let mut rows = vec![0.0; h * ow];
    for y in 0..h {
        for x in 0..ow {
            rows[y * ow + x] = (0..SSIM_WINDOW).map(|i| k[i] * plane[y * w + x + i]).sum();
        }
    }
    let mut out = vec![0.0; oh * ow];
    for y in 0..oh {
        for x in 0..ow {
            out[y * ow + x] = (0..SSIM_WINDOW).map(|i| k[i] * rows[(y + i) * ow + x]).sum();
        }
    }
    (out, oh, ow)
}

fn ssim_plane(a: &[f64], b: &[f64], h: usize, w: usize) -> f64 {
    let k = gaussian_kernel();
    let c1 = (SSIM_K1 * 1.0) * (SSIM_K1 * 1.0);
    let c2 = (SSIM_K2 * 1.0) * (SSIM_K2 * 1.0);
    let prod = |f: &dyn Fn(f64, f64) -> f64| -> Vec<f64> {
        a.iter().zip(b).map(|(&x, &y)| f(x, y)).collect()
    };
    let (mu_a, ..) = filter(a, h, w, &k);
    let (mu_b, ..) = filter(b, h, w, &k);
    let (e_aa, ..) = filter(&prod(&|x, _| x * x), h, w, &k);
    let (e_bb, ..) = filter(&prod(&|_, y| y * y), h, w, &k);
    let (e_ab, oh, ow) = filter(&prod(&|x, y| x * y), h, w, &k);
    let mut total = 0.0;
    for i in 0..oh * ow {
        let (ma, mb) = (mu_a[i], mu_b[i]);
        let va = e_aa[i] - ma * ma;
        let vb = e_bb[i] - mb * mb;
        let cov = e_ab[i] - ma * mb;
        total += ((2.0 * ma * mb + c1) * (2.0 * cov + c2))
            / ((ma * ma + mb * mb + c1) * (va + vb + c2));
    }
    total / (oh * ow) as f64
}

/// Mean local SSIM with an 11x11 Gaussian window (sigma 1.5), dynamic range 1,
/// averaged over channels.
pub fn ssim(pred: &Signal, truth: &Signal) -> Result<f64> {
    pred.check_same_shape(truth)?;
    let (h, w, c) = match *truth.shape() {
        [h, w, c] if truth.modality() == Modality::Image2D => (h, w, c),
        [h, w] => (h, w, 1),
        _ => {
            return Err(Error::InvalidParameter(
                "ssim needs a 2-D image".into(),
            ))
        }
    };
    let side = h.min(w);
    if side < SSIM_WINDOW {
        return Err(Error::TooSmall {
            side,
            window: SSIM_WINDOW,
        });
    }
    let plane = |s: &Signal, ch: usize| -> Vec<f64> {
        s.data().iter().skip(ch).step_by(c).copied().collect()
    };
    let total: f64 = (0..c)
        .map(|ch| ssim_plane(&plane(pred, ch), &plane(truth, ch), h, w))
        .sum();
    Ok(total / c as f64)
}

/// Scale-invariant SNR in dB, capped at [`DB_CAP`].
pub fn si_snr(pred: &Signal, truth: &Signal) -> Result<f64> {
    pred.check_same_shape(truth)?;
    si_snr_slices(pred.data(), truth.data())
}

pub fn si_snr_slices(pred: &[f64], truth: &[f64]) -> Result<f64> {
    let n = truth.len() as f64;
    let mp = pred.iter().sum::<f64>() / n;
    let mt = truth.iter().sum::<f64>() / n;
    let p: Vec<f64> = pred.iter().map(|v| v - mp).collect();
    let t: Vec<f64> = truth.iter().map(|v| v - mt).collect();
    let tt: f64 = t.iter().map(|v| v * v).sum();
    if tt == 0.0 {
        return Err(Error::ZeroTarget);
    }
    let pt: f64 = p.iter().zip(&t).map(|(a, b)| a * b).sum();
    let scale = pt / tt;
    let (mut signal, mut noise) = (0.0, 0.0);
    for (pv, tv) in p.iter().zip(&t) {
        let s = scale * tv;
        signal += s * s;
        noise += (pv - s) * (pv - s);
    }
    if noise == 0.0 {
        return Ok(DB_CAP);
    }
    Ok((10.0 * (signal / noise).log10()).min(DB_CAP))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn img(v: Vec<f64>, h: usize, w: usize) -> Signal {
        Signal::image(v, h, w, 1).unwrap()
    }

    fn ramp(h: usize, w: usize) -> Signal {
        img(
            (0..h * w)
                .map(|i| ((i % w) as f64 / w as f64 + (i / w) as f64 / h as f64) / 2.0)
                .collect(),
            h,
            w,
        )
    }

    #[test]
    fn psnr_examples() {
        let a = Signal::from_vec(vec![0.0, 0.5, 1.0]).unwrap();
        assert_eq!(psnr(&a, &a, 1.0).unwrap(), DB_CAP);
        assert!((psnr_from_mse(0.01, 1.0) - 20.0).abs() < 1e-12);
        assert!((psnr_from_mse(1e-4, 1.0) - 40.0).abs() < 1e-12);
        let b = Signal::from_vec(vec![0.0, 0.5]).unwrap();
        assert!(matches!(psnr(&a, &b, 1.0), Err(Error::ShapeMismatch { .. })));
    }

    #[test]
    fn ssim_identical_and_negative() {
        let a = ramp(32, 32);
        assert!((ssim(&a, &a).unwrap() - 1.0).abs() < 1e-12);
        // negative about 0.5: every local covariance flips sign
        let neg = a.map(|v| 1.0 - v);
        let v = ssim(&neg, &a).unwrap();
        assert!(v < 0.0, "{v}");
        let small = ramp(10, 40);
        assert!(matches!(ssim(&small, &small), Err(Error::TooSmall { side: 10, .. })));
    }

    #[test]
    fn ssim_of_constants_is_luminance_term() {
        let (x, y) = (0.4, 0.5);
        let a = img(vec![x; 16 * 16], 16, 16);
        let b = img(vec![y; 16 * 16], 16, 16);
        let c1 = 0.01f64 * 0.01;
        let expected = (2.0 * x * y + c1) / (x * x + y * y + c1);
        assert!((ssim(&a, &b).unwrap() - expected).abs() < 1e-9);
    }

    #[test]
    fn si_snr_examples() {
        let t: Vec<f64> = (0..1000).map(|i| (i as f64 * 0.05).sin()).collect();
        let ts = Signal::from_vec(t.clone()).unwrap();
        assert_eq!(si_snr(&ts, &ts).unwrap(), DB_CAP);
        let doubled = ts.map(|v| 2.0 * v);
        assert_eq!(si_snr(&doubled, &ts).unwrap(), DB_CAP);

        // noise orthogonal to the zero-mean target, one tenth of its norm
        let tm = t.iter().sum::<f64>() / t.len() as f64;
        let tc: Vec<f64> = t.iter().map(|v| v - tm).collect();
        let raw: Vec<f64> = (0..1000).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
        let proj = dot(&raw, &tc) / dot(&tc, &tc);
        let mut noise: Vec<f64> = raw.iter().zip(&tc).map(|(r, c)| r - proj * c).collect();
        let nm = noise.iter().sum::<f64>() / 1000.0;
        noise.iter_mut().for_each(|v| *v -= nm);
        let proj = dot(&noise, &tc) / dot(&tc, &tc);
        noise.iter_mut().zip(&tc).for_each(|(v, c)| *v -= proj * c);
        let k = (dot(&tc, &tc) / dot(&noise, &noise)).sqrt() / 10.0;
        let pred: Vec<f64> = t.iter().zip(&noise).map(|(a, n)| a + k * n).collect();
        let v = si_snr_slices(&pred, &t).unwrap();
        assert!((v - 20.0).abs() < 1e-9, "{v}");

        assert!(matches!(si_snr_slices(&t, &vec![0.0; 1000]), Err(Error::ZeroTarget)));
    }

    proptest! {
        #[test]
        fn psnr_decreases_with_mse(m in 1e-12f64..10.0, f in 1.0001f64..100.0) {
            prop_assert!(psnr_from_mse(m * f, 1.0) < psnr_from_mse(m, 1.0));
        }

        #[test]
        fn ssim_is_symmetric(seed in 0u64..1000) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let a = img((0..400).map(|_| rng.random::<f64>()).collect(), 20, 20);
            let b = img((0..400).map(|_| rng.random::<f64>()).collect(), 20, 20);
            prop_assert!((ssim(&a, &b).unwrap() - ssim(&b, &a).unwrap()).abs() < 1e-12);
        }

        #[test]
        fn si_snr_ignores_positive_scale(seed in 0u64..1000, c in 0.001f64..1000.0) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let t: Vec<f64> = (0..256).map(|_| rng.random::<f64>() - 0.5).collect();
            let p: Vec<f64> = t.iter().map(|v| v + 0.3 * (rng.random::<f64>() - 0.5)).collect();
            let scaled: Vec<f64> = p.iter().map(|v| c * v).collect();
            let (x, y) = (si_snr_slices(&p, &t).unwrap(), si_snr_slices(&scaled, &t).unwrap());
            prop_assert!((x - y).abs() < 1e-9);
        }
    }
}
