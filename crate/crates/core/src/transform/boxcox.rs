//! Box-Cox power transform with a maximum-likelihood exponent.

/// Shift that makes every sample strictly positive before the transform.
pub const SHIFT_EPS: f64 = 1e-6;
pub const LAMBDA_RANGE: (f64, f64) = (-2.0, 2.0);

/// `(y^lambda - 1) / lambda`, or `ln y` at `lambda == 0`.
pub fn boxcox(y: f64, lambda: f64) -> f64 {
    let ln = y.ln();
    if lambda.abs() < 1e-12 {
        ln
    } else {
        (lambda * ln).exp_m1() / lambda
    }
}

pub fn inv_boxcox(t: f64, lambda: f64) -> f64 {
    if lambda.abs() < 1e-12 {
        t.exp()
    } else {
        ((lambda * t).ln_1p() / lambda).exp()
    }
}

/// Profile log-likelihood of `lambda` for positive samples, up to a constant.
pub fn log_likelihood(samples: &[f64], lambda: f64) -> f64 {
    let n = samples.len() as f64;
    let transformed: Vec<f64> = samples.iter().map(|&y| boxcox(y, lambda)).collect();
    let mean = transformed.iter().sum::<f64>() / n;
    let var = transformed.iter().map(|t| (t - mean) * (t - mean)).sum::<f64>() / n;
    let log_sum: f64 = samples.iter().map(|y| y.ln()).sum();
    -0.5 * n * var.max(f64::MIN_POSITIVE).ln() + (lambda - 1.0) * log_sum
}

/// Golden-section search for the likelihood maximiser on `[lo, hi]`.
pub fn fit_lambda(samples: &[f64], lo: f64, hi: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = log_likelihood(samples, c);
    let mut fd = log_likelihood(samples, d);
    while b - a > 1e-9 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = log_likelihood(samples, c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = log_likelihood(samples, d);
        }
    }
    0.5 * (a + b)
}
