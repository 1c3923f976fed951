use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::trig;
use crate::error::{Error, Result};

/// Hidden-layer nonlinearity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Activation {
    /// `sin(omega0 * u)`
    Sine,
    /// `sin(omega0 * (|u| + 1) * u)`, the variable-periodic sine.
    FinerSine,
}

impl Activation {
    pub fn name(self) -> &'static str {
        match self {
            Activation::Sine => "sine",
            Activation::FinerSine => "finer",
        }
    }

    pub fn tag(self) -> u8 {
        match self {
            Activation::Sine => 0,
            Activation::FinerSine => 1,
        }
    }

    pub fn from_tag(tag: u8) -> Option<Self> {
        match tag {
            0 => Some(Activation::Sine),
            1 => Some(Activation::FinerSine),
            _ => None,
        }
    }

    /// Activation value and its derivative with respect to the pre-activation `u`.
    #[inline]
    pub fn eval(self, u: f64, omega0: f64) -> (f64, f64) {
        match self {
            Activation::Sine => {
                let (s, c) = (omega0 * u).sin_cos();
                (s, omega0 * c)
            }
            Activation::FinerSine => {
                let a = u.abs();
                let (s, c) = (omega0 * (a + 1.0) * u).sin_cos();
                // d/du [(|u| + 1) u] = 2|u| + 1, taking sign(0) = 0
                (s, omega0 * (2.0 * a + 1.0) * c)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkConfig {
    /// Number of sine layers.
    pub hidden_layers: usize,
    pub width: usize,
    pub in_dim: usize,
    pub out_dim: usize,
    pub activation: Activation,
    pub omega0: f64,
    /// Half-width of the uniform first-layer bias init for [`Activation::FinerSine`].
    pub finer_bias_k: f64,
    pub seed: u64,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        Self {
            hidden_layers: 3,
            width: 64,
            in_dim: 2,
            out_dim: 1,
            activation: Activation::Sine,
            omega0: 30.0,
            finer_bias_k: 1.0,
            seed: 0,
        }
    }
}

impl NetworkConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.omega0 > 0.0 && self.omega0.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "omega0 must be positive, got {}",
                self.omega0
            )));
        }
        if self.width == 0 || self.in_dim == 0 || self.out_dim == 0 || self.hidden_layers == 0 {
            return Err(Error::InvalidParameter(
                "width, in_dim, out_dim and hidden_layers must be at least 1".into(),
            ));
        }
        if !(self.finer_bias_k >= 0.0) {
            return Err(Error::InvalidParameter("finer_bias_k must be >= 0".into()));
        }
        Ok(())
    }

    /// `(fan_in, fan_out)` per layer, the last one being the linear output layer.
    pub fn layer_dims(&self) -> Vec<(usize, usize)> {
        let mut dims = Vec::with_capacity(self.hidden_layers + 1);
        dims.push((self.in_dim, self.width));
        for _ in 1..self.hidden_layers {
            dims.push((self.width, self.width));
        }
        dims.push((self.width, self.out_dim));
        dims
    }

    pub fn param_count(&self) -> usize {
        self.layer_dims().iter().map(|&(i, o)| i * o + o).sum()
    }

    /// Uniform half-width of the hidden/output weight init.
    pub fn hidden_weight_bound(&self, fan_in: usize) -> f64 {
        (6.0 / fan_in as f64).sqrt() / self.omega0
    }
}

/// Offsets of one layer inside the flat parameter vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LayerSpan {
    pub fan_in: usize,
    pub fan_out: usize,
    /// start of the row-major `fan_out x fan_in` weight block
    pub weight: usize,
    /// start of the `fan_out` bias block
    pub bias: usize,
}

impl LayerSpan {
    pub fn end(&self) -> usize {
        self.bias + self.fan_out
    }
}

fn spans(cfg: &NetworkConfig) -> Vec<LayerSpan> {
    let mut offset = 0;
    cfg.layer_dims()
        .into_iter()
        .map(|(fan_in, fan_out)| {
            let span = LayerSpan {
                fan_in,
                fan_out,
                weight: offset,
                bias: offset + fan_in * fan_out,
            };
            offset = span.end();
            span
        })
        .collect()
}

/// Parameters of a sine MLP plus the Adam moment buffers that train them.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkState {
    pub(crate) config: NetworkConfig,
    pub(crate) spans: Vec<LayerSpan>,
    pub(crate) params: Vec<f64>,
    pub(crate) first_moment: Vec<f64>,
    pub(crate) second_moment: Vec<f64>,
    pub(crate) step: u64,
}

impl NetworkState {
    /// Sinusoidal-network initialisation, deterministic in `cfg.seed`.
    pub fn init(cfg: &NetworkConfig) -> Result<Self> {
        cfg.validate()?;
        let spans = spans(cfg);
        let total = spans.last().map(LayerSpan::end).unwrap_or(0);
        let mut params = vec![0.0; total];
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        for (index, span) in spans.iter().enumerate() {
            let bound = if index == 0 {
                1.0 / cfg.in_dim as f64
            } else {
                cfg.hidden_weight_bound(span.fan_in)
            };
            for w in &mut params[span.weight..span.bias] {
                *w = rng.random_range(-bound..=bound);
            }
            if index == 0 && cfg.activation == Activation::FinerSine && cfg.finer_bias_k > 0.0 {
                let k = cfg.finer_bias_k;
                for b in &mut params[span.bias..span.end()] {
                    *b = rng.random_range(-k..=k);
                }
            }
        }
        Ok(Self::from_params(cfg.clone(), params))
    }

    pub(crate) fn from_params(config: NetworkConfig, params: Vec<f64>) -> Self {
        let spans = spans(&config);
        let n = params.len();
        Self {
            config,
            spans,
            params,
            first_moment: vec![0.0; n],
            second_moment: vec![0.0; n],
            step: 0,
        }
    }

    pub fn config(&self) -> &NetworkConfig {
        &self.config
    }

    pub fn spans(&self) -> &[LayerSpan] {
        &self.spans
    }

    /// All weights and biases, layer by layer (`W` row-major, then `b`).
    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn step(&self) -> u64 {
        self.step
    }

    pub fn weights(&self, layer: usize) -> &[f64] {
        let s = self.spans[layer];
        &self.params[s.weight..s.bias]
    }

    pub fn bias(&self, layer: usize) -> &[f64] {
        let s = self.spans[layer];
        &self.params[s.bias..s.end()]
    }

    /// Predictions for `coords` (row-major, `in_dim` values per point).
    pub fn forward(&self, coords: &[f64]) -> Result<Vec<f64>> {
        let mut tape = Tape::default();
        self.forward_tape(coords, &mut tape)?;
        Ok(tape.output().to_vec())
    }

    /// Mean-squared-error loss and its gradient with respect to [`Self::params`].
    pub fn loss_and_gradient(&self, coords: &[f64], targets: &[f64]) -> Result<(f64, Vec<f64>)> {
        let mut tape = Tape::default();
        let mut grad = vec![0.0; self.params.len()];
        self.forward_tape(coords, &mut tape)?;
        let loss = self.backward_tape(&mut tape, targets, &mut grad)?;
        Ok((loss, grad))
    }

    pub fn mse(&self, coords: &[f64], targets: &[f64]) -> Result<f64> {
        let pred = self.forward(coords)?;
        if pred.len() != targets.len() {
            return Err(Error::ShapeMismatch {
                expected: vec![pred.len()],
                actual: vec![targets.len()],
            });
        }
        Ok(mean_sq_diff(&pred, targets))
    }

    /// Runs the forward pass, keeping every intermediate needed by
    /// [`Self::backward_tape`]. Buffers in `tape` are reused across calls.
    pub fn forward_tape(&self, coords: &[f64], tape: &mut Tape) -> Result<()> {
        let in_dim = self.config.in_dim;
        if coords.len() % in_dim != 0 || coords.is_empty() {
            return Err(Error::ShapeMismatch {
                expected: vec![in_dim],
                actual: vec![coords.len()],
            });
        }
        let n = coords.len() / in_dim;
        let layers = self.spans.len();
        tape.resize(n, &self.spans);
        tape.input.clear();
        tape.input.extend_from_slice(coords);

        let omega0 = self.config.omega0;
        let act = self.config.activation;
        for (l, span) in self.spans.iter().enumerate() {
            let (prev, rest) = tape.outputs.split_at_mut(l);
            let input: &[f64] = if l == 0 { &tape.input } else { &prev[l - 1] };
            let out = &mut rest[0];
            affine(
                input,
                &self.params[span.weight..span.bias],
                &self.params[span.bias..span.end()],
                n,
                span.fan_in,
                span.fan_out,
                out,
            );
            if l + 1 < layers {
                activate(act, omega0, out, &mut tape.derivs[l]);
            }
        }
        tape.points = n;
        Ok(())
    }

    /// Backpropagates the MSE between the taped output and `targets` into
    /// `grad` (overwritten). Returns the loss.
    pub fn backward_tape(&self, tape: &mut Tape, targets: &[f64], grad: &mut [f64]) -> Result<f64> {
        let n = tape.points;
        let out_dim = self.config.out_dim;
        if targets.len() != n * out_dim {
            return Err(Error::ShapeMismatch {
                expected: vec![n * out_dim],
                actual: vec![targets.len()],
            });
        }
        debug_assert_eq!(grad.len(), self.params.len());
        let layers = self.spans.len();
        let count = (n * out_dim) as f64;

        let output = &tape.outputs[layers - 1];
        let delta = &mut tape.delta;
        delta.clear();
        let mut loss = 0.0;
        for (p, t) in output.iter().zip(targets) {
            let r = p - t;
            loss += r * r;
            delta.push(2.0 * r / count);
        }
        loss /= count;

        for l in (0..layers).rev() {
            let span = self.spans[l];
            let input: &[f64] = if l == 0 { &tape.input } else { &tape.outputs[l - 1] };
            // dW = delta^T . input
            unsafe {
                matrixmultiply::dgemm(
                    span.fan_out,
                    n,
                    span.fan_in,
                    1.0,
                    tape.delta.as_ptr(),
                    1,
                    span.fan_out as isize,
                    input.as_ptr(),
                    span.fan_in as isize,
                    1,
                    0.0,
                    grad[span.weight..].as_mut_ptr(),
                    span.fan_in as isize,
                    1,
                );
            }
            let gb = &mut grad[span.bias..span.end()];
            gb.iter_mut().for_each(|g| *g = 0.0);
            for row in tape.delta.chunks_exact(span.fan_out) {
                for (g, d) in gb.iter_mut().zip(row) {
                    *g += d;
                }
            }
            if l == 0 {
                break;
            }
            // delta_prev = (delta . W) * act'(u_prev)
            let back = &mut tape.back;
            back.resize(n * span.fan_in, 0.0);
            unsafe {
                matrixmultiply::dgemm(
                    n,
                    span.fan_out,
                    span.fan_in,
                    1.0,
                    tape.delta.as_ptr(),
                    span.fan_out as isize,
                    1,
                    self.params[span.weight..].as_ptr(),
                    span.fan_in as isize,
                    1,
                    0.0,
                    back.as_mut_ptr(),
                    span.fan_in as isize,
                    1,
                );
            }
            for (b, d) in back.iter_mut().zip(&tape.derivs[l - 1]) {
                *b *= d;
            }
            std::mem::swap(&mut tape.delta, &mut tape.back);
        }
        Ok(loss)
    }
}

/// Replaces pre-activations in `values` by activations, writing slopes to `slopes`.
fn activate(act: Activation, omega0: f64, values: &mut [f64], slopes: &mut [f64]) {
    let peak = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let reach = match act {
        Activation::Sine => omega0 * peak,
        Activation::FinerSine => omega0 * (peak + 1.0) * peak,
    };
    if !(reach < trig::LIMIT) {
        for (u, d) in values.iter_mut().zip(slopes.iter_mut()) {
            (*u, *d) = act.eval(*u, omega0);
        }
        return;
    }
    match act {
        Activation::Sine => {
            for (u, d) in values.iter_mut().zip(slopes.iter_mut()) {
                let (s, c) = trig::sin_cos(omega0 * *u);
                *u = s;
                *d = omega0 * c;
            }
        }
        Activation::FinerSine => {
            for (u, d) in values.iter_mut().zip(slopes.iter_mut()) {
                let a = u.abs();
                let (s, c) = trig::sin_cos(omega0 * (a + 1.0) * *u);
                *u = s;
                *d = omega0 * (2.0 * a + 1.0) * c;
            }
        }
    }
}

/// `out = input . W^T + b` for `n` rows.
fn affine(
    input: &[f64],
    weight: &[f64],
    bias: &[f64],
    n: usize,
    fan_in: usize,
    fan_out: usize,
    out: &mut [f64],
) {
    debug_assert_eq!(input.len(), n * fan_in);
    debug_assert_eq!(out.len(), n * fan_out);
    for row in out.chunks_exact_mut(fan_out) {
        row.copy_from_slice(bias);
    }
    unsafe {
        matrixmultiply::dgemm(
            n,
            fan_in,
            fan_out,
            1.0,
            input.as_ptr(),
            fan_in as isize,
            1,
            weight.as_ptr(),
            1,
            fan_in as isize,
            1.0,
            out.as_mut_ptr(),
            fan_out as isize,
            1,
        );
    }
}

pub(crate) fn mean_sq_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() / a.len() as f64
}

/// Reusable forward/backward buffers.
#[derive(Debug, Default, Clone)]
pub struct Tape {
    points: usize,
    input: Vec<f64>,
    /// post-activation output of each layer (the last one is the prediction)
    outputs: Vec<Vec<f64>>,
    /// activation slope for each sine layer
    derivs: Vec<Vec<f64>>,
    delta: Vec<f64>,
    back: Vec<f64>,
}

impl Tape {
    fn resize(&mut self, n: usize, spans: &[LayerSpan]) {
        self.outputs.resize_with(spans.len(), Vec::new);
        self.derivs.resize_with(spans.len() - 1, Vec::new);
        for (l, span) in spans.iter().enumerate() {
            self.outputs[l].resize(n * span.fan_out, 0.0);
            if l + 1 < spans.len() {
                self.derivs[l].resize(n * span.fan_out, 0.0);
            }
        }
    }

    pub fn output(&self) -> &[f64] {
        self.outputs.last().map(Vec::as_slice).unwrap_or(&[])
    }

    /// Post-activation values of sine layer `layer`.
    pub fn hidden(&self, layer: usize) -> &[f64] {
        &self.outputs[layer]
    }
}
