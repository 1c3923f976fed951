use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::sync::Arc;

use super::runner::CellResult;
use super::{is_image, ExperimentSpec, Task};
use crate::error::Result;
use crate::inr::{save_network, Activation};
use crate::io::{save_image, save_wav, Audio};
use crate::signal::Modality;
use crate::transform::write_params;

/// Column order of the long-format report. `wall_seconds` is the only
/// column that varies between identical runs.
pub const CSV_HEADER: &str = "task,input,variant,backbone,seed,params_hash,checkpoint,metric,value,wall_seconds";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Metric {
    /// Statistics of the untransformed input (checkpoint 0).
    InputStd,
    InputSkew,
    /// Statistics of the transformed signal (checkpoint 0).
    Std,
    Skew,
    Range,
    Loss,
    Psnr,
    Ssim,
    SiSnr,
    /// Iteration at which training diverged.
    Diverged,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::InputStd => "input_std",
            Metric::InputSkew => "input_skew",
            Metric::Std => "std",
            Metric::Skew => "skew",
            Metric::Range => "range",
            Metric::Loss => "loss",
            Metric::Psnr => "psnr",
            Metric::Ssim => "ssim",
            Metric::SiSnr => "si_snr",
            Metric::Diverged => "diverged",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub input: String,
    pub variant: String,
    pub seed: u64,
    pub params_hash: String,
    pub checkpoint: usize,
    pub metric: Metric,
    pub value: f64,
    pub wall_seconds: f64,
}

/// Results of one experiment, cells ordered by (input, variant, seed).
#[derive(Debug, Clone)]
pub struct Report {
    pub task: Task,
    pub backbone: Activation,
    pub checkpoints: Vec<usize>,
    /// Variant labels in spec order.
    pub variants: Vec<String>,
    cells: Vec<Arc<CellResult>>,
}

impl Report {
    pub(crate) fn new(spec: &ExperimentSpec, mut cells: Vec<Arc<CellResult>>) -> Self {
        cells.sort_by(|x, y| {
            (&x.input, &x.variant, x.seed).cmp(&(&y.input, &y.variant, y.seed))
        });
        Self {
            task: spec.task,
            backbone: spec.backbone,
            checkpoints: spec.checkpoints.clone(),
            variants: spec.variants.iter().map(|v| v.label()).collect(),
            cells,
        }
    }

    pub fn cells(&self) -> &[Arc<CellResult>] {
        &self.cells
    }

    /// Distinct input labels in report order.
    pub fn inputs(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for c in &self.cells {
            if out.last() != Some(&c.input) {
                out.push(c.input.clone());
            }
        }
        out
    }

    pub fn final_checkpoint(&self) -> usize {
        *self.checkpoints.last().expect("validated spec has checkpoints")
    }

    pub fn diverged(&self) -> bool {
        self.cells.iter().any(|c| c.diverged_at.is_some())
    }

    pub fn rows(&self) -> Vec<Row> {
        let mut rows = Vec::new();
        for c in &self.cells {
            let hash = c.params.digest();
            let mut push = |checkpoint: usize, metric: Metric, value: f64, wall: f64| {
                rows.push(Row {
                    input: c.input.clone(),
                    variant: c.variant.clone(),
                    seed: c.seed,
                    params_hash: hash.clone(),
                    checkpoint,
                    metric,
                    value,
                    wall_seconds: wall,
                });
            };
            let t = c.transformed.seconds;
            push(0, Metric::InputStd, c.original.std, t);
            push(0, Metric::InputSkew, c.original.skew, t);
            push(0, Metric::Std, c.transformed.std, t);
            push(0, Metric::Skew, c.transformed.skew, t);
            push(0, Metric::Range, c.transformed.range, t);
            for p in &c.trace {
                let w = c.fit_seconds;
                push(p.iteration, Metric::Loss, p.loss, w);
                push(p.iteration, Metric::Psnr, p.quality.psnr, w);
                if let Some(v) = p.quality.ssim {
                    push(p.iteration, Metric::Ssim, v, w);
                }
                if let Some(v) = p.quality.si_snr {
                    push(p.iteration, Metric::SiSnr, v, w);
                }
            }
            if let Some(it) = c.diverged_at {
                push(it, Metric::Diverged, it as f64, c.fit_seconds);
            }
        }
        rows
    }

    /// Long-format CSV. Without `timing` the `wall_seconds` column is
    /// dropped, and identical runs give identical bytes.
    pub fn csv(&self, timing: bool) -> String {
        let mut out = String::new();
        if timing {
            out.push_str(CSV_HEADER);
        } else {
            out.push_str(CSV_HEADER.trim_end_matches(",wall_seconds"));
        }
        out.push('\n');
        let backbone = self.backbone.name();
        for r in self.rows() {
            let _ = write!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                self.task.label(),
                r.input,
                r.variant,
                backbone,
                r.seed,
                r.params_hash,
                r.checkpoint,
                r.metric.name(),
                r.value
            );
            if timing {
                let _ = write!(out, ",{:.6}", r.wall_seconds);
            }
            out.push('\n');
        }
        out
    }

    fn values(&self, input: Option<&str>, variant: &str, checkpoint: usize, metric: Metric) -> Vec<f64> {
        self.rows()
            .into_iter()
            .filter(|r| {
                r.variant == variant
                    && r.checkpoint == checkpoint
                    && r.metric == metric
                    && input.is_none_or(|i| r.input == i)
            })
            .map(|r| r.value)
            .collect()
    }

    /// Mean of `metric` for `variant` over every input and seed.
    pub fn mean(&self, variant: &str, checkpoint: usize, metric: Metric) -> Option<f64> {
        mean(&self.values(None, variant, checkpoint, metric))
    }

    /// Mean over seeds for a single input.
    pub fn mean_for(&self, input: &str, variant: &str, checkpoint: usize, metric: Metric) -> Option<f64> {
        mean(&self.values(Some(input), variant, checkpoint, metric))
    }

    /// Human-readable table: one line per variant, mean PSNR (and SSIM or
    /// SI-SNR when present) at each checkpoint.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        let _ = write!(out, "{:<14}{:>8}{:>8}", "variant", "skew", "range");
        for c in &self.checkpoints {
            let _ = write!(out, "{:>10}", format!("psnr@{c}"));
        }
        let extra = [Metric::Ssim, Metric::SiSnr]
            .into_iter()
            .find(|&m| self.variants.iter().any(|v| self.mean(v, self.final_checkpoint(), m).is_some()));
        if let Some(m) = extra {
            let _ = write!(out, "{:>12}", format!("{}@{}", m.name(), self.final_checkpoint()));
        }
        out.push('\n');
        for v in &self.variants {
            let f = |m: Metric, c: usize| self.mean(v, c, m).unwrap_or(f64::NAN);
            let _ = write!(out, "{:<14}{:>8.3}{:>8.3}", v, f(Metric::Skew, 0), f(Metric::Range, 0));
            for &c in &self.checkpoints {
                let _ = write!(out, "{:>10.2}", f(Metric::Psnr, c));
            }
            if let Some(m) = extra {
                let _ = write!(out, "{:>12.4}", f(m, self.final_checkpoint()));
            }
            out.push('\n');
        }
        out
    }

    /// Per cell: reconstruction, network checkpoint, transform sidecar and trace CSV.
    pub fn write_artifacts(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        for c in &self.cells {
            let stem = format!("{}__{}__s{}", c.input, c.variant, c.seed);
            if let Some(rec) = &c.reconstruction {
                match rec.modality() {
                    Modality::Image2D if is_image(rec) && matches!(rec.channels(), 1 | 3) => {
                        let ext = if rec.channels() == 1 { "pgm" } else { "ppm" };
                        save_image(rec, dir.join(format!("{stem}.{ext}")))?;
                    }
                    Modality::Audio1D if rec.channels() == 1 => {
                        let audio = Audio {
                            signal: rec.clone(),
                            sample_rate: c.sample_rate.unwrap_or(16_000),
                        };
                        save_wav(&audio, dir.join(format!("{stem}.wav")))?;
                    }
                    _ => crate::container::write_tensor(dir.join(format!("{stem}.spt")), rec)?,
                }
            }
            save_network(&c.network, dir.join(format!("{stem}.sptn")))?;
            write_params(dir.join(format!("{stem}.sptp")), &c.params)?;
            let mut trace = String::from("iteration,loss,psnr\n");
            for p in &c.trace {
                let _ = writeln!(trace, "{},{},{}", p.iteration, p.loss, p.quality.psnr);
            }
            fs::write(dir.join(format!("{stem}_trace.csv")), trace)?;
        }
        Ok(())
    }

    /// Mean `metric` at the final checkpoint per variant, keyed by label.
    pub fn final_means(&self, metric: Metric) -> BTreeMap<String, f64> {
        let last = self.final_checkpoint();
        self.variants
            .iter()
            .filter_map(|v| self.mean(v, last, metric).map(|m| (v.clone(), m)))
            .collect()
    }
}

fn mean(v: &[f64]) -> Option<f64> {
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}
