//! Summary statistics, equal-width histograms and empirical quantiles.

use crate::error::{Error, Result};
use crate::signal::Signal;

/// Default histogram resolution, one bin per 8-bit intensity level.
pub const DEFAULT_BINS: usize = 256;

/// Probability masses over `bins` equal-width bins of `[lo, hi]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub lo: f64,
    pub hi: f64,
    pub masses: Vec<f64>,
}

impl Histogram {
    pub fn new(samples: &[f64], bins: usize, lo: f64, hi: f64) -> Result<Self> {
        if bins == 0 {
            return Err(Error::InvalidParameter("bins must be positive".into()));
        }
        if samples.is_empty() {
            return Err(Error::EmptySignal);
        }
        let mut counts = vec![0u64; bins];
        for &v in samples {
            counts[bin_index(v, lo, hi, bins)] += 1;
        }
        Ok(Self::from_counts(lo, hi, &counts, samples.len()))
    }

    pub(crate) fn from_counts(lo: f64, hi: f64, counts: &[u64], n: usize) -> Self {
        let n = n as f64;
        Self {
            lo,
            hi,
            masses: counts.iter().map(|&c| c as f64 / n).collect(),
        }
    }

    pub fn bins(&self) -> usize {
        self.masses.len()
    }

    pub fn same_layout(&self, other: &Histogram) -> bool {
        self.masses.len() == other.masses.len() && self.lo == other.lo && self.hi == other.hi
    }

    /// Mass falling in `[from, to]`, splitting partially covered bins
    /// in proportion to overlap.
    pub fn mass_between(&self, from: f64, to: f64) -> f64 {
        let width = (self.hi - self.lo) / self.bins() as f64;
        if width <= 0.0 {
            return if from <= self.lo && self.lo <= to {
                self.masses.iter().sum()
            } else {
                0.0
            };
        }
        self.masses
            .iter()
            .enumerate()
            .map(|(k, &m)| {
                let left = self.lo + k as f64 * width;
                let right = left + width;
                let overlap = (to.min(right) - from.max(left)).max(0.0);
                m * overlap / width
            })
            .sum()
    }
}

/// Bin of `v` among `bins` equal-width bins of `[lo, hi]`; out-of-range values go to the end bins.
#[inline]
pub(crate) fn bin_index(v: f64, lo: f64, hi: f64, bins: usize) -> usize {
    let width = hi - lo;
    if width > 0.0 {
        let pos = ((v - lo) / width * bins as f64).floor();
        pos.clamp(0.0, (bins - 1) as f64) as usize
    } else {
        0
    }
}

/// Moments, histogram and (optionally) a copy of a sample set for quantiles.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalStats {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
    /// Third standardised moment; 0 for constant inputs.
    pub skewness: f64,
    pub histogram: Histogram,
    /// Samples in input order; quantiles select from a copy.
    pub samples: Option<Vec<f64>>,
}

impl SignalStats {
    /// Statistics with the histogram spanning `[min, max]` of the data.
    pub fn from_samples(samples: &[f64], bins: usize) -> Result<Self> {
        let (lo, hi) = checked_min_max(samples)?;
        Self::build(samples, bins, lo, hi, lo, hi)
    }

    /// Statistics with the histogram over a fixed `[lo, hi]`, so two sample
    /// sets can be compared bin for bin.
    pub fn from_samples_in(samples: &[f64], bins: usize, lo: f64, hi: f64) -> Result<Self> {
        if !(hi >= lo) {
            return Err(Error::InvalidParameter(format!("empty histogram range [{lo}, {hi}]")));
        }
        let (min, max) = checked_min_max(samples)?;
        Self::build(samples, bins, min, max, lo, hi)
    }

    fn build(samples: &[f64], bins: usize, min: f64, max: f64, lo: f64, hi: f64) -> Result<Self> {
        let histogram = Histogram::new(samples, bins, lo, hi)?;
        let m = moments(samples);
        Ok(Self {
            min,
            max,
            mean: m.mean.clamp(min, max),
            std: m.std,
            skewness: m.skewness().unwrap_or(0.0),
            histogram,
            samples: Some(samples.to_vec()),
        })
    }

    /// Drops the sample copy.
    pub fn without_samples(mut self) -> Self {
        self.samples = None;
        self
    }

    /// Empirical quantile by linear interpolation between closest ranks
    /// (`h = (n - 1) p`). `p` is clamped to `[0, 1]`.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        let samples = self.samples.as_deref().ok_or(Error::MissingSamples)?;
        Ok(quantile_of(samples, p))
    }

    /// Fraction of samples `<= x`.
    pub fn cdf(&self, x: f64) -> Result<f64> {
        let samples = self.samples.as_deref().ok_or(Error::MissingSamples)?;
        let count = samples.iter().filter(|&&v| v <= x).count();
        Ok(count as f64 / samples.len() as f64)
    }
}

pub fn compute_stats(s: &Signal, bins: usize) -> Result<SignalStats> {
    SignalStats::from_samples(s.data(), bins)
}

/// [`quantile_sorted`] without sorting: two order statistics by selection.
pub fn quantile_of(samples: &[f64], p: f64) -> f64 {
    let n = samples.len();
    if n == 1 {
        return samples[0];
    }
    let h = (n - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let mut work = samples.to_vec();
    let (_, &mut below, rest) = work.select_nth_unstable_by(lo, f64::total_cmp);
    if lo + 1 >= n {
        return below;
    }
    let above = rest.iter().copied().min_by(f64::total_cmp).expect("lo + 1 < n");
    let frac = h - lo as f64;
    below + frac * (above - below)
}

pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    if lo + 1 >= n {
        return sorted[n - 1];
    }
    let frac = h - lo as f64;
    sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
}

fn checked_min_max(samples: &[f64]) -> Result<(f64, f64)> {
    if samples.is_empty() {
        return Err(Error::EmptySignal);
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (index, &v) in samples.iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::NonFinite { index, value: v });
        }
        lo = lo.min(v);
        hi = hi.max(v);
    }
    Ok((lo, hi))
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Moments {
    pub mean: f64,
    pub std: f64,
    pub m3: f64,
    /// largest absolute sample
    pub scale: f64,
}

impl Moments {
    pub fn skewness(&self) -> Option<f64> {
        // spread at rounding-noise level counts as constant
        (self.std > 1e-13 * self.scale && self.std > 0.0)
            .then(|| self.m3 / (self.std * self.std * self.std))
    }
}

/// Two-pass population moments.
pub(crate) fn moments(samples: &[f64]) -> Moments {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let (mut m2, mut m3, mut scale) = (0.0, 0.0, 0.0f64);
    for &v in samples {
        scale = scale.max(v.abs());
        let d = v - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
    }
    Moments {
        mean,
        std: (m2 / n).sqrt(),
        m3: m3 / n,
        scale,
    }
}

/// `E[((t - mean) / std)^3]`. Fails with [`Error::DegenerateStd`] for constant data.
pub fn skewness_metric(t: &Signal) -> Result<f64> {
    skewness_of(t.data())
}

pub fn skewness_of(samples: &[f64]) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptySignal);
    }
    moments(samples).skewness().ok_or(Error::DegenerateStd)
}

/// `(max - min) / (b - a)`: how much of the target bound the data spans.
pub fn range_metric(t: &Signal, a: f64, b: f64) -> Result<f64> {
    if !(b > a) {
        return Err(Error::InvalidParameter(format!("target bound [{a}, {b}] is empty")));
    }
    let (lo, hi) = t.min_max();
    Ok((hi - lo) / (b - a))
}

/// Ranks starting at 1, ties sharing their average rank.
fn average_ranks(v: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..v.len()).collect();
    order.sort_by(|&i, &j| v[i].total_cmp(&v[j]));
    let mut ranks = vec![0.0; v.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && v[order[end]] == v[order[start]] {
            end += 1;
        }
        let rank = (start + end + 1) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = rank;
        }
        start = end;
    }
    ranks
}

/// Spearman rank correlation (Pearson correlation of average ranks).
/// `None` when lengths differ, fewer than two points, or either side is constant.
pub fn spearman(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return None;
    }
    let (rx, ry) = (average_ranks(x), average_ranks(y));
    let n = x.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    (sxx > 0.0 && syy > 0.0).then(|| sxy / (sxx * syy).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, LogNormal};

    fn sig(v: &[f64]) -> Signal {
        Signal::from_vec(v.to_vec()).unwrap()
    }

    #[test]
    fn symmetric_set_has_zero_skew() {
        let st = compute_stats(&sig(&[-1.0, 0.0, 1.0]), 4).unwrap();
        assert_eq!((st.min, st.max), (-1.0, 1.0));
        assert!(st.skewness.abs() < 1e-12);
    }

    #[test]
    fn constant_signal() {
        let st = compute_stats(&sig(&[0.3; 10]), DEFAULT_BINS).unwrap();
        assert_eq!((st.min, st.max), (0.3, 0.3));
        assert_eq!(st.skewness, 0.0);
        assert_eq!(st.histogram.masses.iter().filter(|&&m| m > 0.0).count(), 1);
        assert!(matches!(skewness_metric(&sig(&[0.3; 10])), Err(Error::DegenerateStd)));
        assert_eq!(range_metric(&sig(&[0.3; 10]), -1.0, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn lognormal_skew_matches_closed_form() {
        let s2: f64 = 0.25;
        let expected = (s2.exp() + 2.0) * (s2.exp() - 1.0).sqrt();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let d = LogNormal::new(0.0, 0.5).unwrap();
        let draws: Vec<f64> = (0..1_000_000).map(|_| d.sample(&mut rng)).collect();
        let st = SignalStats::from_samples(&draws, DEFAULT_BINS).unwrap();
        assert!((expected - 1.7502).abs() < 1e-3);
        assert!((st.skewness - expected).abs() < 0.05, "{} vs {expected}", st.skewness);
    }

    #[test]
    fn quantile_examples() {
        let st = SignalStats::from_samples(&[1.0, 0.0], 2).unwrap();
        assert_eq!(st.quantile(0.5).unwrap(), 0.5);

        let grid: Vec<f64> = (0..1000).map(|i| i as f64 / 999.0).collect();
        let st = SignalStats::from_samples(&grid, 16).unwrap();
        // brute force: a quarter of the grid lies at or below 0.25
        let below = grid.iter().filter(|&&v| v <= 0.25).count() as f64 / 1000.0;
        assert!((below - 0.25).abs() < 1e-3);
        assert!((st.quantile(0.25).unwrap() - 0.25).abs() < 1e-3);

        let sym = [2.0, 3.0, 5.0, 7.0, 8.0];
        let st = SignalStats::from_samples(&sym, 8).unwrap();
        assert!((st.quantile(0.5).unwrap() - 5.0).abs() < 1e-9);

        assert!(matches!(st.without_samples().quantile(0.5), Err(Error::MissingSamples)));
    }

    #[test]
    fn range_examples() {
        assert_eq!(range_metric(&sig(&[-1.0, 0.2, 1.0]), -1.0, 1.0).unwrap(), 1.0);
        assert_eq!(range_metric(&sig(&[-0.5, 0.5]), -1.0, 1.0).unwrap(), 0.5);
        assert!(range_metric(&sig(&[0.0, 1.0]), 1.0, 1.0).is_err());
    }

    #[test]
    fn mass_between_splits_partial_bins() {
        let h = Histogram {
            lo: 0.0,
            hi: 1.0,
            masses: vec![0.5, 0.25, 0.25, 0.0],
        };
        assert!((h.mass_between(0.0, 0.1) - 0.2).abs() < 1e-12);
        assert!((h.mass_between(0.0, 1.0) - 1.0).abs() < 1e-12);
        assert!((h.mass_between(0.25, 0.375) - 0.125).abs() < 1e-12);
    }

    fn samples() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-50.0f64..50.0, 2..200)
    }

    proptest! {
        #[test]
        fn histogram_mass_is_one(v in samples(), bins in 1usize..300) {
            let st = SignalStats::from_samples(&v, bins).unwrap();
            let total: f64 = st.histogram.masses.iter().sum();
            prop_assert!((total - 1.0).abs() < 1e-9);
            prop_assert!(st.min <= st.mean && st.mean <= st.max);
        }

        #[test]
        fn quantile_inverts_cdf(v in samples()) {
            let st = SignalStats::from_samples(&v, 8).unwrap();
            let n = v.len() as f64;
            for &x in &v {
                let f = st.cdf(x).unwrap();
                let q = st.quantile(f).unwrap();
                let frac = v.iter().filter(|&&y| y <= q).count() as f64 / n;
                prop_assert!((frac - f).abs() <= 1.0 / n + 1e-12, "x={x} f={f} frac={frac}");
            }
        }

        #[test]
        fn selection_matches_sorting(v in samples(), p in 0.0f64..=1.0) {
            let mut sorted = v.clone();
            sorted.sort_by(f64::total_cmp);
            prop_assert_eq!(quantile_of(&v, p).to_bits(), quantile_sorted(&sorted, p).to_bits());
        }

        #[test]
        fn quantile_is_monotone(v in samples(), p in 0.0f64..1.0, dp in 0.0f64..1.0) {
            let st = SignalStats::from_samples(&v, 8).unwrap();
            let q = (p + dp).min(1.0);
            prop_assert!(st.quantile(p).unwrap() <= st.quantile(q).unwrap());
        }

        #[test]
        fn skew_flips_under_negation(v in samples()) {
            prop_assume!(moments(&v).std > 1e-6);
            let neg: Vec<f64> = v.iter().map(|x| -x).collect();
            let (s, n) = (skewness_of(&v).unwrap(), skewness_of(&neg).unwrap());
            prop_assert!((s + n).abs() < 1e-9);
        }

        #[test]
        fn skew_is_affine_invariant(v in samples(), c in 0.01f64..100.0, d in -100.0f64..100.0) {
            prop_assume!(moments(&v).std > 1e-3);
            let w: Vec<f64> = v.iter().map(|x| c * x + d).collect();
            let (s, t) = (skewness_of(&v).unwrap(), skewness_of(&w).unwrap());
            prop_assert!((s - t).abs() < 1e-9, "{s} vs {t}");
        }
    }

    #[test]
    fn spearman_examples() {
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[10.0, 20.0, 30.0]), Some(1.0));
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[3.0, 1.0, 0.0]), Some(-1.0));
        // 1 - 6 sum(d^2) / (n (n^2 - 1)) with d = (0, 2, -1, -1) -> 1 - 36/60
        let r = spearman(&[1.0, 2.0, 3.0, 4.0], &[1.0, 4.0, 2.0, 3.0]).unwrap();
        assert!((r - 0.4).abs() < 1e-12);
        assert_eq!(spearman(&[1.0, 1.0], &[1.0, 2.0]), None);
        assert_eq!(average_ranks(&[5.0, 1.0, 5.0]), vec![2.5, 1.0, 2.5]);
    }
}
