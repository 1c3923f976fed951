//! Symmetric power transformation and its building blocks.

use log::{debug, warn};

use super::{Inverted, TransformKind, TransformParams};
use crate::error::{Error, Result};
use crate::signal::Signal;
use crate::stats::{bin_index, quantile_of, Histogram, SignalStats, DEFAULT_BINS};

/// Floor/ceiling applied to the quantile before taking its log.
pub const QUANTILE_EPS: f64 = 1e-4;
pub const BETA_MIN: f64 = 0.1;
pub const BETA_MAX: f64 = 10.0;
/// Largest soft-boundary padding on either side.
pub const MAX_PAD: f64 = 0.05;
/// How far outside `[a, b]` a sample may sit before inversion warns about it.
pub const BOUND_SLACK: f64 = 1e-6;

/// Settings of the symmetric power transformation. The three `use_*`
/// switches exist for ablations; all are on by default.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymPowerConfig {
    pub a: f64,
    pub b: f64,
    /// Quantile level driven to `lambda` by the power (0.5: the median).
    pub lambda: f64,
    /// Calibration strength.
    pub xi: f64,
    /// Width of the boundary window the calibration looks at.
    pub tau: f64,
    /// Soft-boundary scale.
    pub kappa: f64,
    pub bins: usize,
    pub use_power: bool,
    pub use_calibration: bool,
    pub use_soft_boundary: bool,
}

impl Default for SymPowerConfig {
    fn default() -> Self {
        Self {
            a: -1.0,
            b: 1.0,
            lambda: 0.5,
            xi: 0.5,
            tau: 0.1,
            kappa: 256.0,
            bins: DEFAULT_BINS,
            use_power: true,
            use_calibration: true,
            use_soft_boundary: true,
        }
    }
}

impl SymPowerConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if !(self.b > self.a) || !self.a.is_finite() || !self.b.is_finite() {
            return bad(format!("target bound [{}, {}] is empty", self.a, self.b));
        }
        if !(self.lambda > 0.0 && self.lambda < 1.0) {
            return bad(format!("lambda must lie in (0, 1), got {}", self.lambda));
        }
        if !(self.xi >= 0.0) {
            return bad(format!("xi must be >= 0, got {}", self.xi));
        }
        if !(self.tau > 0.0 && self.tau <= 0.5) {
            return bad(format!("tau must lie in (0, 0.5], got {}", self.tau));
        }
        if !(self.kappa >= 0.0) {
            return bad(format!("kappa must be >= 0, got {}", self.kappa));
        }
        if self.bins == 0 {
            return bad("bins must be positive".into());
        }
        Ok(())
    }
}

/// Output of [`normalize01`].
#[derive(Debug, Clone)]
pub struct Normalized {
    pub signal: Signal,
    pub y_min: f64,
    pub y_max: f64,
    /// Set when the input was constant; the output is then all 0.5.
    pub degenerate: bool,
}

/// Min-max normalisation to `[0, 1]`.
pub fn normalize01(s: &Signal) -> Normalized {
    let (y_min, y_max) = s.min_max();
    let span = y_max - y_min;
    if !(span > 0.0) {
        warn!("normalize01: constant signal ({y_min}), mapping to 0.5");
        return Normalized {
            signal: s.map(|_| 0.5),
            y_min,
            y_max,
            degenerate: true,
        };
    }
    Normalized {
        signal: s.map(|v| ((v - y_min) / span).clamp(0.0, 1.0)),
        y_min,
        y_max,
        degenerate: false,
    }
}

/// `ln(lambda) / ln(Q_lambda)` with the quantile clamped to
/// `[QUANTILE_EPS, 1 - QUANTILE_EPS]` and the result to `[BETA_MIN, BETA_MAX]`.
pub fn compute_beta(stats_y0: &SignalStats, lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    let q = stats_y0.quantile(lambda)?;
    Ok(beta_from_quantile(q, lambda))
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "lambda must lie in (0, 1), got {lambda}"
        )))
    }
}

pub fn beta_from_quantile(q: f64, lambda: f64) -> f64 {
    let qc = q.clamp(QUANTILE_EPS, 1.0 - QUANTILE_EPS);
    if qc != q {
        debug!("quantile {q} clamped to {qc}");
    }
    let beta = lambda.ln() / qc.ln();
    let clamped = beta.clamp(BETA_MIN, BETA_MAX);
    if clamped != beta {
        debug!("beta {beta} clamped to {clamped}");
    }
    clamped
}

/// Boundary-window mass the power map adds, as used by the calibration.
///
/// For `beta > 1` the window is `[0, tau]`, for `beta < 1` it is `[1 - tau, 1]`.
pub fn boundary_mass_gain(
    beta: f64,
    stats_y0: &SignalStats,
    stats_pow: &SignalStats,
    tau: f64,
) -> Result<f64> {
    mass_gain(beta, &stats_y0.histogram, &stats_pow.histogram, tau)
}

/// Calibration window `[from, to]` inside the histogram range, or `None` for `beta == 1`.
fn window(beta: f64, h: &Histogram, tau: f64) -> Option<(f64, f64)> {
    if beta > 1.0 {
        Some((h.lo, h.lo + tau * (h.hi - h.lo)))
    } else if beta < 1.0 {
        Some((h.hi - tau * (h.hi - h.lo), h.hi))
    } else {
        None
    }
}

fn mass_gain(beta: f64, h0: &Histogram, hp: &Histogram, tau: f64) -> Result<f64> {
    if !h0.same_layout(hp) {
        return Err(Error::MismatchedBins {
            left: h0.bins(),
            right: hp.bins(),
        });
    }
    let Some((from, to)) = window(beta, h0, tau) else {
        return Ok(0.0);
    };
    Ok(hp.mass_between(from, to) - h0.mass_between(from, to))
}

/// Histogram of `y0p^beta` on `[0, 1]` that is exact on the bins touching the
/// calibration window and empty elsewhere, which is all the calibration reads.
/// Only samples that can land in the window are raised to the power.
fn powered_window_histogram(y0p: &[f64], beta: f64, bins: usize, tau: f64) -> Histogram {
    let mut counts = vec![0u64; bins];
    let full = Histogram::from_counts(0.0, 1.0, &counts, 1);
    let Some((from, to)) = window(beta, &full, tau) else {
        return full;
    };
    let first = bin_index(from, 0.0, 1.0, bins);
    let last = bin_index(to, 0.0, 1.0, bins);
    let edge = |k: usize| (k as f64 / bins as f64).powf(1.0 / beta);
    // a relative margin keeps rounding in powf from dropping a sample
    let low = edge(first) * (1.0 - 1e-9);
    let high = if last + 1 >= bins { f64::INFINITY } else { edge(last + 1) * (1.0 + 1e-9) };
    for &v in y0p {
        if v >= low && v <= high {
            let k = bin_index(power(v, beta), 0.0, 1.0, bins);
            if (first..=last).contains(&k) {
                counts[k] += 1;
            }
        }
    }
    Histogram::from_counts(0.0, 1.0, &counts, y0p.len())
}

/// Deviation-aware calibration: moves `beta` toward 1 by `xi` times the
/// boundary-window mass gain, never past 1.
pub fn calibrate_beta(
    beta: f64,
    stats_y0: &SignalStats,
    stats_pow: &SignalStats,
    xi: f64,
    tau: f64,
) -> Result<f64> {
    let gain = boundary_mass_gain(beta, stats_y0, stats_pow, tau)?;
    Ok(calibrated(beta, gain, xi))
}

fn calibrated(beta: f64, gain: f64, xi: f64) -> f64 {
    let delta = xi * gain;
    if beta > 1.0 {
        (beta - delta).clamp(1.0, beta)
    } else if beta < 1.0 {
        (beta + delta).clamp(beta, 1.0)
    } else {
        1.0
    }
}

/// Output of [`soft_boundary`].
#[derive(Debug, Clone)]
pub struct SoftBoundary {
    pub signal: Signal,
    pub pad0: f64,
    pub pad1: f64,
}

/// Paddings `min(kappa * f / bins, MAX_PAD)` from the masses of the lowest and
/// highest histogram bins.
pub fn boundary_pads(stats_y0: &SignalStats, kappa: f64) -> (f64, f64) {
    pads_from(&stats_y0.histogram, kappa)
}

fn pads_from(h: &Histogram, kappa: f64) -> (f64, f64) {
    let masses = &h.masses;
    let bins = masses.len() as f64;
    let pad = |f: f64| (kappa * f / bins).clamp(0.0, MAX_PAD);
    (pad(masses[0]), pad(masses[masses.len() - 1]))
}

/// Affine squeeze `(y0 + pad0) / (1 + pad0 + pad1)` that moves the data off
/// the boundaries in proportion to how much mass sits on them.
pub fn soft_boundary(y0: &Signal, stats_y0: &SignalStats, kappa: f64) -> SoftBoundary {
    let (pad0, pad1) = boundary_pads(stats_y0, kappa);
    SoftBoundary {
        signal: pad_signal(y0, pad0, pad1),
        pad0,
        pad1,
    }
}

fn pad_signal(y0: &Signal, pad0: f64, pad1: f64) -> Signal {
    if pad0 == 0.0 && pad1 == 0.0 {
        y0.clone()
    } else {
        let denom = 1.0 + pad0 + pad1;
        y0.map(|v| (v + pad0) / denom)
    }
}

/// Forward symmetric power transformation onto `[cfg.a, cfg.b]`.
pub fn sym_power_forward(s: &Signal, cfg: &SymPowerConfig) -> Result<(Signal, TransformParams)> {
    cfg.validate()?;
    let norm = normalize01(s);
    let mut params = TransformParams::identity(TransformKind::SymPower, cfg.a, cfg.b);
    params.y_min = norm.y_min;
    params.y_max = norm.y_max;
    params.xi = cfg.xi;
    params.tau = cfg.tau;
    params.kappa = cfg.kappa;
    params.lambda = cfg.lambda;
    if norm.degenerate {
        let mid = 0.5 * (cfg.a + cfg.b);
        return Ok((s.map(|_| mid), params));
    }

    // Histograms and the quantile are computed directly rather than through
    // full `SignalStats`: on megapixel inputs the moments, copies and the
    // full powered histogram would dominate the cost.
    let hist_y0 = Histogram::new(norm.signal.data(), cfg.bins, 0.0, 1.0)?;
    let (y0p, pad0, pad1) = if cfg.use_soft_boundary {
        let (pad0, pad1) = pads_from(&hist_y0, cfg.kappa);
        (pad_signal(&norm.signal, pad0, pad1), pad0, pad1)
    } else {
        (norm.signal, 0.0, 0.0)
    };
    let hist_y0p = if pad0 == 0.0 && pad1 == 0.0 {
        hist_y0
    } else {
        Histogram::new(y0p.data(), cfg.bins, 0.0, 1.0)?
    };

    let beta = if cfg.use_power {
        check_lambda(cfg.lambda)?;
        beta_from_quantile(quantile_of(y0p.data(), cfg.lambda), cfg.lambda)
    } else {
        1.0
    };
    let beta_plus = if cfg.use_calibration && beta != 1.0 {
        let hist_pow = powered_window_histogram(y0p.data(), beta, cfg.bins, cfg.tau);
        calibrated(beta, mass_gain(beta, &hist_y0p, &hist_pow, cfg.tau)?, cfg.xi)
    } else {
        beta
    };
    debug!("sym-power: beta {beta:.4} -> {beta_plus:.4}, pads ({pad0:.4}, {pad1:.4})");

    params.beta = beta;
    params.beta_plus = beta_plus;
    params.pad0 = pad0;
    params.pad1 = pad1;
    let (a, span) = (cfg.a, cfg.b - cfg.a);
    let out = y0p.map(|v| span * power(v, beta_plus) + a);
    Ok((out, params))
}

/// Inverse of [`sym_power_forward`]. Samples outside `[a, b]` (network
/// predictions, typically) are clamped first and counted.
pub fn sym_power_invert(t: &Signal, p: &TransformParams) -> Result<Inverted> {
    p.validate_bound()?;
    let (clamped, count) = clamp_to_bound(t.data(), p.a, p.b);
    let span = p.b - p.a;
    let range = p.y_max - p.y_min;
    let denom = 1.0 + p.pad0 + p.pad1;
    let root = 1.0 / p.beta_plus;
    let data: Vec<f64> = clamped
        .into_iter()
        .map(|v| {
            if range == 0.0 {
                return p.y_min;
            }
            let y0p = power((v - p.a) / span, root);
            let y0 = y0p * denom - p.pad0;
            y0 * range + p.y_min
        })
        .collect();
    let data = clamp_to_data_range(data, p);
    Ok(Inverted {
        signal: t.replace_data(data),
        clamped: count,
    })
}

/// `x^e` for `x` in `[0, 1]`, exact at the end points.
#[inline]
pub(crate) fn power(x: f64, e: f64) -> f64 {
    if e == 1.0 {
        x
    } else if x <= 0.0 {
        0.0
    } else {
        x.powf(e)
    }
}

/// Clamps to `[lo, hi]`, counting samples more than [`BOUND_SLACK`] outside.
pub(crate) fn clamp_to_bound(data: &[f64], lo: f64, hi: f64) -> (Vec<f64>, usize) {
    let mut outside = 0;
    let out = data
        .iter()
        .map(|&v| {
            if v < lo - BOUND_SLACK || v > hi + BOUND_SLACK {
                outside += 1;
            }
            v.clamp(lo, hi)
        })
        .collect();
    if outside > 0 {
        debug!("{outside} samples outside [{lo}, {hi}] clamped before inversion");
    }
    (out, outside)
}

/// Decoded samples are kept within the stored data range.
pub(crate) fn clamp_to_data_range(mut data: Vec<f64>, p: &TransformParams) -> Vec<f64> {
    for v in &mut data {
        *v = v.clamp(p.y_min, p.y_max);
    }
    data
}
