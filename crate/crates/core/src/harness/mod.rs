//! Experiment grids: every (input, variant, seed) cell fits one network on
//! one transformed signal and is scored after inversion.

mod report;
mod runner;

use std::fmt;
use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::inr::{Activation, NetworkConfig};
use crate::io::{self, SyntheticKind, SyntheticSpec};
use crate::signal::{Modality, Signal};
use crate::transform::{self, SymPowerConfig, TransformKind, TransformParams};

pub use report::{Metric, Report, Row, CSV_HEADER};
pub use runner::{CellResult, Runner, TransformSummary};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Task {
    CompareTransforms,
    HypothesisRange,
    HypothesisSkew,
    HypothesisDeviation,
    Ablation,
    FitAudio,
    FitImage,
    FitVolume,
}

impl Task {
    pub fn label(self) -> &'static str {
        match self {
            Task::CompareTransforms => "compare",
            Task::HypothesisRange => "range",
            Task::HypothesisSkew => "skew",
            Task::HypothesisDeviation => "deviation",
            Task::Ablation => "ablation",
            Task::FitAudio => "fit-audio",
            Task::FitImage => "fit-image",
            Task::FitVolume => "fit-volume",
        }
    }
}

/// What is done to a signal before fitting.
#[derive(Debug, Clone, PartialEq)]
pub enum Variant {
    /// A named transform; `SymPower` uses the experiment's sym-power settings.
    Transform(TransformKind),
    /// Sym-power with its own settings, e.g. an ablated stage.
    SymPower { label: String, config: SymPowerConfig },
}

impl Variant {
    pub fn label(&self) -> String {
        match self {
            Variant::Transform(kind) => kind.label(),
            Variant::SymPower { label, .. } => label.clone(),
        }
    }

    /// Baseline `scale1`, then the four ablated variants, then the full transform.
    pub fn ablation_set(full: &SymPowerConfig) -> Vec<Variant> {
        let with = |label: &str, power: bool, calibration: bool, soft: bool| Variant::SymPower {
            label: label.to_string(),
            config: SymPowerConfig {
                use_power: power,
                use_calibration: calibration,
                use_soft_boundary: soft,
                ..*full
            },
        };
        vec![
            Variant::Transform(TransformKind::Scale(1.0)),
            with("wo_basic", false, true, true),
            with("wo_cali", true, false, true),
            with("wo_soft", true, true, false),
            with("wo_cali_soft", true, false, false),
            with("full", true, true, true),
        ]
    }

    pub fn apply(&self, s: &Signal, sym: &SymPowerConfig) -> Result<(Signal, TransformParams)> {
        match self {
            Variant::Transform(TransformKind::SymPower) => transform::sym_power_forward(s, sym),
            Variant::Transform(kind) => transform::apply_baseline(s, *kind, sym.a, sym.b),
            Variant::SymPower { config, .. } => transform::sym_power_forward(s, config),
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// Where a cell's signal comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum InputSource {
    /// `.pgm`/`.ppm` image, `.wav` audio or `.spt` tensor.
    File(PathBuf),
    Synthetic(SyntheticSpec),
    Inline { label: String, signal: Signal },
}

/// A loaded input.
#[derive(Debug, Clone)]
pub struct Input {
    pub label: String,
    pub signal: Signal,
    pub sample_rate: Option<u32>,
}

impl InputSource {
    pub fn load(&self) -> Result<Input> {
        match self {
            InputSource::File(path) => {
                let label = path
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| path.display().to_string());
                let ext = path
                    .extension()
                    .map(|e| e.to_string_lossy().to_ascii_lowercase())
                    .unwrap_or_default();
                let (signal, sample_rate) = match ext.as_str() {
                    "pgm" | "ppm" | "pnm" => (io::load_image(path)?, None),
                    "wav" => {
                        let audio = io::load_wav(path)?;
                        (audio.signal, Some(audio.sample_rate))
                    }
                    "spt" => (crate::container::read_tensor(path)?, None),
                    _ => {
                        return Err(Error::UnsupportedFormat(format!(
                            "cannot tell the format of {}",
                            path.display()
                        )))
                    }
                };
                Ok(Input {
                    label,
                    signal,
                    sample_rate,
                })
            }
            InputSource::Synthetic(spec) => {
                let generated = io::generate(spec)?;
                let sample_rate = match spec.kind {
                    SyntheticKind::SpeechLike { sample_rate } => Some(sample_rate),
                    _ => None,
                };
                Ok(Input {
                    label: spec.label(),
                    signal: generated.signal,
                    sample_rate,
                })
            }
            InputSource::Inline { label, signal } => Ok(Input {
                label: label.clone(),
                signal: signal.clone(),
                sample_rate: None,
            }),
        }
    }
}

/// PSNR peak: 1 for data inside `[0, 1]`, otherwise the data range.
pub fn peak_for(s: &Signal) -> f64 {
    let (lo, hi) = s.min_max();
    if lo >= 0.0 && hi <= 1.0 {
        1.0
    } else if hi > lo {
        hi - lo
    } else {
        1.0
    }
}

/// Normal inputs for the skewness sweep: one per `mu`, shared `sigma` and layout.
pub fn skew_sweep_inputs(mus: &[f64], sigma: f64, side: usize, seed: u64) -> Vec<InputSource> {
    mus.iter()
        .map(|&mu| {
            InputSource::Synthetic(SyntheticSpec::new(
                SyntheticKind::NormalClipped { mu, sigma },
                &[side, side],
                seed,
            ))
        })
        .collect()
}

/// Zero-mean normal inputs for the deviation sweep, one per `sigma`.
pub fn deviation_sweep_inputs(sigmas: &[f64], side: usize, seed: u64) -> Vec<InputSource> {
    sigmas
        .iter()
        .map(|&sigma| {
            InputSource::Synthetic(SyntheticSpec::new(
                SyntheticKind::NormalClipped { mu: 0.0, sigma },
                &[side, side],
                seed,
            ))
        })
        .collect()
}

pub const RANGE_FACTORS: [f64; 5] = [0.25, 0.5, 1.0, 2.0, 4.0];

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub task: Task,
    pub backbone: Activation,
    pub variants: Vec<Variant>,
    pub seeds: Vec<u64>,
    /// Evaluation iterations; the last one is the training length.
    pub checkpoints: Vec<usize>,
    pub inputs: Vec<InputSource>,
    /// Layer sizes, `omega0` and FINER bias width. Input/output sizes,
    /// activation and seed are filled in per cell.
    pub network: NetworkConfig,
    pub lr: f64,
    pub sym: SymPowerConfig,
}

impl ExperimentSpec {
    /// Defaults for `task`: 5 seeds, checkpoints 100/300/500/1000, 3x64 sine
    /// network, lr 1e-4, omega0 30 (100 for audio).
    pub fn new(task: Task, inputs: Vec<InputSource>) -> Self {
        let sym = SymPowerConfig::default();
        let variants = match task {
            Task::CompareTransforms => TransformKind::comparison_set(0)
                .into_iter()
                .map(Variant::Transform)
                .collect(),
            Task::HypothesisRange => RANGE_FACTORS
                .iter()
                .map(|&k| Variant::Transform(TransformKind::Scale(k)))
                .collect(),
            Task::HypothesisSkew | Task::HypothesisDeviation => {
                vec![Variant::Transform(TransformKind::Scale(1.0))]
            }
            Task::Ablation => Variant::ablation_set(&sym),
            Task::FitAudio | Task::FitImage | Task::FitVolume => vec![
                Variant::Transform(TransformKind::Scale(1.0)),
                Variant::Transform(TransformKind::SymPower),
            ],
        };
        let omega0 = if task == Task::FitAudio { 100.0 } else { 30.0 };
        Self {
            task,
            backbone: Activation::Sine,
            variants,
            seeds: (0..5).collect(),
            checkpoints: vec![100, 300, 500, 1000],
            inputs,
            network: NetworkConfig {
                omega0,
                ..NetworkConfig::default()
            },
            lr: 1e-4,
            sym,
        }
    }

    pub fn iterations(&self) -> usize {
        self.checkpoints.last().copied().unwrap_or(0)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.to_string()));
        if self.seeds.is_empty() {
            return bad("at least one seed is required");
        }
        if self.inputs.is_empty() || self.variants.is_empty() {
            return bad("at least one input and one variant are required");
        }
        if self.checkpoints.is_empty() || self.checkpoints[0] == 0 {
            return bad("checkpoints must be positive");
        }
        if self.checkpoints.windows(2).any(|w| w[0] >= w[1]) {
            return bad("checkpoints must be strictly increasing");
        }
        if !(self.lr > 0.0) {
            return bad("lr must be positive");
        }
        self.sym.validate()?;
        NetworkConfig {
            activation: self.backbone,
            ..self.network.clone()
        }
        .validate()
    }
}

fn expect_task(spec: &ExperimentSpec, allowed: &[Task]) -> Result<()> {
    if allowed.contains(&spec.task) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "task '{}' does not belong here",
            spec.task.label()
        )))
    }
}

/// Transform comparison: one row group per variant, averaged over inputs and seeds.
pub fn run_compare(runner: &Runner, spec: &ExperimentSpec) -> Result<Report> {
    expect_task(spec, &[Task::CompareTransforms])?;
    runner.run(spec)
}

/// Range, skewness or deviation sweep.
pub fn run_hypothesis(runner: &Runner, spec: &ExperimentSpec) -> Result<Report> {
    expect_task(
        spec,
        &[Task::HypothesisRange, Task::HypothesisSkew, Task::HypothesisDeviation],
    )?;
    runner.run(spec)
}

pub fn run_ablation(runner: &Runner, spec: &ExperimentSpec) -> Result<Report> {
    expect_task(spec, &[Task::Ablation])?;
    runner.run(spec)
}

/// Audio, image or volume fitting. Writes per-cell artifacts when `out_dir` is given.
pub fn run_fit(runner: &Runner, spec: &ExperimentSpec, out_dir: Option<&std::path::Path>) -> Result<Report> {
    expect_task(spec, &[Task::FitAudio, Task::FitImage, Task::FitVolume])?;
    let report = runner.run(spec)?;
    if let Some(dir) = out_dir {
        report.write_artifacts(dir)?;
    }
    Ok(report)
}

/// Network for a signal: coordinate dimensions in, channels out.
pub(crate) fn network_for(spec: &ExperimentSpec, signal: &Signal, seed: u64) -> NetworkConfig {
    NetworkConfig {
        in_dim: signal.coord_shape().len(),
        out_dim: signal.channels(),
        activation: spec.backbone,
        seed,
        ..spec.network.clone()
    }
}

pub(crate) fn is_image(s: &Signal) -> bool {
    s.modality() == Modality::Image2D
}
