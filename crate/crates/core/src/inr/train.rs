//! Full-batch fitting of a transformed signal.

use std::fmt::Write as _;
use std::time::{Duration, Instant};

use super::adam::Adam;
use super::network::{NetworkState, Tape};
use crate::error::{Error, Result};
use crate::io::coord_grid;
use crate::metrics::QualityReport;
use crate::signal::Signal;
use crate::transform::TransformParams;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub lr: f64,
    pub iterations: usize,
    /// Evaluate every this many iterations (0 disables the periodic schedule).
    pub eval_every: usize,
    /// Extra evaluation points; values above `iterations` are ignored.
    pub checkpoints: Vec<usize>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            lr: 1e-4,
            iterations: 1000,
            eval_every: 0,
            checkpoints: vec![100, 300, 500, 1000],
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lr > 0.0) || !self.lr.is_finite() {
            return Err(Error::InvalidParameter(format!("lr must be positive, got {}", self.lr)));
        }
        if self.iterations == 0 {
            return Err(Error::InvalidParameter("iterations must be at least 1".into()));
        }
        Ok(())
    }

    /// Sorted, de-duplicated evaluation iterations; always ends at `iterations`.
    pub fn schedule(&self) -> Vec<usize> {
        let mut points: Vec<usize> = self
            .checkpoints
            .iter()
            .copied()
            .filter(|&c| c >= 1 && c <= self.iterations)
            .collect();
        if self.eval_every > 0 {
            points.extend((1..=self.iterations / self.eval_every).map(|k| k * self.eval_every));
        }
        points.push(self.iterations);
        points.sort_unstable();
        points.dedup();
        points
    }
}

/// What a network is fitted to: the transformed signal, plus what is needed
/// to score predictions against the original.
#[derive(Debug, Clone)]
pub struct FitTarget {
    pub transformed: Signal,
    pub params: TransformParams,
    pub original: Signal,
    /// PSNR peak in the original domain.
    pub peak: f64,
}

impl FitTarget {
    pub fn new(transformed: Signal, params: TransformParams, original: Signal, peak: f64) -> Result<Self> {
        transformed.check_same_shape(&original)?;
        if !(peak > 0.0) {
            return Err(Error::InvalidParameter(format!("peak must be positive, got {peak}")));
        }
        Ok(Self {
            transformed,
            params,
            original,
            peak,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TracePoint {
    pub iteration: usize,
    /// Training loss in the transformed domain.
    pub loss: f64,
    /// Quality of the inverted prediction against the original signal.
    pub quality: QualityReport,
}

#[derive(Debug, Clone)]
pub struct FitReport {
    pub trace: Vec<TracePoint>,
    /// Iteration at which the loss stopped being finite, if it did.
    pub diverged_at: Option<usize>,
    pub wall_time: Duration,
    /// Final inverted prediction; `None` after divergence.
    pub reconstruction: Option<Signal>,
}

impl FitReport {
    pub fn last(&self) -> &TracePoint {
        self.trace.last().expect("trace is never empty")
    }

    pub fn at(&self, iteration: usize) -> Option<&TracePoint> {
        self.trace.iter().find(|p| p.iteration == iteration)
    }

    /// `Err(DivergenceDetected)` when the run was aborted.
    pub fn ensure_converging(&self) -> Result<()> {
        match self.diverged_at {
            Some(iteration) => Err(Error::DivergenceDetected { iteration }),
            None => Ok(()),
        }
    }

    /// `iteration,loss,psnr` rows with a header.
    pub fn trace_csv(&self) -> String {
        let mut out = String::from("iteration,loss,psnr\n");
        for p in &self.trace {
            let _ = writeln!(out, "{},{},{}", p.iteration, p.loss, p.quality.psnr);
        }
        out
    }
}

/// Trains `state` on `target` with full-batch Adam on the MSE loss.
///
/// Evaluation points come from [`TrainConfig::schedule`]. The loss recorded
/// at iteration `k` is the loss after `k` updates. A non-finite loss stops
/// training and is reported through [`FitReport::diverged_at`].
pub fn train(state: &mut NetworkState, target: &FitTarget, cfg: &TrainConfig) -> Result<FitReport> {
    cfg.validate()?;
    let signal = &target.transformed;
    let net = state.config();
    if net.in_dim != signal.coord_shape().len() || net.out_dim != signal.channels() {
        return Err(Error::ShapeMismatch {
            expected: vec![net.in_dim, net.out_dim],
            actual: vec![signal.coord_shape().len(), signal.channels()],
        });
    }
    let coords = coord_grid(signal.coord_shape());
    let targets = signal.data();
    let adam = Adam::new(cfg.lr);
    let schedule = cfg.schedule();
    let mut next_eval = schedule.iter().copied().peekable();

    let mut tape = Tape::default();
    let mut grad = vec![0.0; state.params().len()];
    let mut trace = Vec::with_capacity(schedule.len());
    let mut diverged_at = None;
    let mut last_prediction = None;
    let started = Instant::now();

    for iteration in 0..=cfg.iterations {
        state.forward_tape(&coords, &mut tape)?;
        let evaluate = next_eval.peek() == Some(&iteration);
        let loss = if iteration < cfg.iterations {
            state.backward_tape(&mut tape, targets, &mut grad)?
        } else {
            crate::inr::mean_sq_diff(tape.output(), targets)
        };
        if !loss.is_finite() {
            diverged_at = Some(iteration);
            let quality = QualityReport {
                mse: f64::NAN,
                psnr: f64::NAN,
                ssim: None,
                si_snr: None,
            };
            trace.push(TracePoint {
                iteration,
                loss,
                quality,
            });
            break;
        }
        if evaluate {
            next_eval.next();
            let prediction = signal.with_data(tape.output().to_vec())?;
            let inverted = target.params.invert(&prediction)?.signal;
            let quality = QualityReport::evaluate(&inverted, &target.original, target.peak)?;
            trace.push(TracePoint {
                iteration,
                loss,
                quality,
            });
            if iteration == cfg.iterations {
                last_prediction = Some(inverted);
            }
        }
        if iteration < cfg.iterations {
            adam.step(state, &grad);
        }
    }
    Ok(FitReport {
        trace,
        diverged_at,
        wall_time: started.elapsed(),
        reconstruction: last_prediction,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inr::NetworkConfig;
    use crate::transform::{apply, TransformKind};

    fn gradient_image(side: usize) -> Signal {
        let data = (0..side * side)
            .map(|i| {
                let (r, c) = (i / side, i % side);
                (r + c) as f64 / (2 * side - 2) as f64
            })
            .collect();
        Signal::image(data, side, side, 1).unwrap()
    }

    fn scaled_target(signal: &Signal) -> FitTarget {
        let (t, p) = apply(signal, TransformKind::Scale(1.0), -1.0, 1.0).unwrap();
        FitTarget::new(t, p, signal.clone(), 1.0).unwrap()
    }

    #[test]
    fn gradient_image_fits_well() {
        let target = scaled_target(&gradient_image(64));
        let mut state = NetworkState::init(&NetworkConfig {
            hidden_layers: 2,
            ..NetworkConfig::default()
        })
        .unwrap();
        let cfg = TrainConfig {
            iterations: 500,
            checkpoints: vec![],
            ..TrainConfig::default()
        };
        let report = train(&mut state, &target, &cfg).unwrap();
        assert!(report.last().quality.psnr > 40.0, "{}", report.last().quality.psnr);
        assert_eq!(report.reconstruction.as_ref().unwrap().shape(), &[64, 64, 1]);
    }

    #[test]
    fn constant_signal_is_learned_quickly() {
        let signal = Signal::image(vec![0.3; 16 * 16], 16, 16, 1).unwrap();
        let target = scaled_target(&signal);
        let mut state = NetworkState::init(&NetworkConfig::default()).unwrap();
        let cfg = TrainConfig {
            lr: 1e-3,
            iterations: 200,
            checkpoints: vec![],
            ..TrainConfig::default()
        };
        let report = train(&mut state, &target, &cfg).unwrap();
        assert!(report.last().loss < 1e-8, "{}", report.last().loss);
    }

    #[test]
    fn identical_runs_give_identical_traces() {
        let target = scaled_target(&gradient_image(16));
        let cfg = TrainConfig {
            iterations: 60,
            eval_every: 20,
            checkpoints: vec![5],
            ..TrainConfig::default()
        };
        let run = || {
            let mut state = NetworkState::init(&NetworkConfig {
                seed: 9,
                ..NetworkConfig::default()
            })
            .unwrap();
            let report = train(&mut state, &target, &cfg).unwrap();
            (report.trace, state)
        };
        let (t1, s1) = run();
        let (t2, s2) = run();
        assert_eq!(t1, t2);
        assert_eq!(s1, s2);
        let its: Vec<usize> = t1.iter().map(|p| p.iteration).collect();
        assert_eq!(its, vec![5, 20, 40, 60]);
    }

    #[test]
    fn schedule_is_sorted_and_ends_at_the_last_iteration() {
        let cfg = TrainConfig {
            iterations: 700,
            eval_every: 250,
            checkpoints: vec![1000, 300, 100, 0, 300],
            ..TrainConfig::default()
        };
        assert_eq!(cfg.schedule(), vec![100, 250, 300, 500, 700]);
    }

    #[test]
    fn divergence_is_reported() {
        let target = scaled_target(&gradient_image(8));
        let mut state = NetworkState::init(&NetworkConfig::default()).unwrap();
        let last = *state.spans().last().unwrap();
        state.params_mut()[last.bias] = f64::INFINITY;
        let report = train(&mut state, &target, &TrainConfig::default()).unwrap();
        assert_eq!(report.diverged_at, Some(0));
        assert!(matches!(
            report.ensure_converging(),
            Err(Error::DivergenceDetected { iteration: 0 })
        ));
        assert!(report.reconstruction.is_none());
    }

    #[test]
    fn rejects_mismatched_network() {
        let target = scaled_target(&gradient_image(8));
        let mut state = NetworkState::init(&NetworkConfig {
            in_dim: 1,
            ..NetworkConfig::default()
        })
        .unwrap();
        assert!(matches!(
            train(&mut state, &target, &TrainConfig::default()),
            Err(Error::ShapeMismatch { .. })
        ));
        let bad = TrainConfig {
            lr: 0.0,
            ..TrainConfig::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn trace_csv_has_one_row_per_point() {
        let target = scaled_target(&gradient_image(8));
        let mut state = NetworkState::init(&NetworkConfig::default()).unwrap();
        let cfg = TrainConfig {
            iterations: 10,
            checkpoints: vec![3],
            ..TrainConfig::default()
        };
        let csv = train(&mut state, &target, &cfg).unwrap().trace_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "iteration,loss,psnr");
        assert_eq!(lines.len(), 3);
        assert!(lines[1].starts_with("3,"));
    }
}
