use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Instant;

use sha2::{Digest, Sha256};

use super::report::Report;
use super::{network_for, peak_for, ExperimentSpec, Input, Variant};
use crate::error::Result;
use crate::inr::{train, FitTarget, NetworkState, TracePoint, TrainConfig};
use crate::signal::Signal;
use crate::stats::{moments, range_metric};
use crate::transform::TransformParams;

/// Statistics of a transformed signal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransformSummary {
    pub std: f64,
    /// 0 for constant data
    pub skew: f64,
    pub range: f64,
    pub seconds: f64,
}

impl TransformSummary {
    fn of(t: &Signal, a: f64, b: f64, seconds: f64) -> Result<Self> {
        let m = moments(t.data());
        Ok(Self {
            std: m.std,
            skew: m.skewness().unwrap_or(0.0),
            range: range_metric(t, a, b)?,
            seconds,
        })
    }
}

/// Outcome of one (input, variant, seed) fit.
#[derive(Debug, Clone)]
pub struct CellResult {
    pub input: String,
    pub variant: String,
    pub seed: u64,
    pub params: TransformParams,
    pub original: TransformSummary,
    pub transformed: TransformSummary,
    pub trace: Vec<TracePoint>,
    pub diverged_at: Option<usize>,
    pub fit_seconds: f64,
    pub reconstruction: Option<Signal>,
    pub network: NetworkState,
    pub sample_rate: Option<u32>,
}

/// Runs experiment cells, optionally on several threads, and remembers
/// finished cells so specs that share cells only fit them once.
pub struct Runner {
    threads: usize,
    cache: Mutex<HashMap<String, Arc<CellResult>>>,
}

impl Default for Runner {
    fn default() -> Self {
        Self::new(default_threads())
    }
}

/// `SYMPOWER_THREADS` if set, otherwise the available parallelism.
pub fn default_threads() -> usize {
    std::env::var("SYMPOWER_THREADS")
        .ok()
        .and_then(|v| v.parse().ok())
        .filter(|&n: &usize| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1))
}

struct Job<'a> {
    key: String,
    input: &'a Input,
    variant: &'a Variant,
    seed: u64,
}

impl Runner {
    pub fn new(threads: usize) -> Self {
        Self {
            threads: threads.max(1),
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn cached_cells(&self) -> usize {
        self.cache.lock().unwrap().len()
    }

    pub fn run(&self, spec: &ExperimentSpec) -> Result<Report> {
        spec.validate()?;
        let inputs: Vec<Input> = spec.inputs.iter().map(|s| s.load()).collect::<Result<_>>()?;
        let mut jobs = Vec::new();
        for input in &inputs {
            let digest = signal_digest(&input.signal);
            for variant in &spec.variants {
                for &seed in &spec.seeds {
                    jobs.push(Job {
                        key: cell_key(spec, &digest, variant, seed),
                        input,
                        variant,
                        seed,
                    });
                }
            }
        }
        let missing: Vec<&Job> = {
            let cache = self.cache.lock().unwrap();
            let mut seen = std::collections::HashSet::new();
            jobs.iter()
                .filter(|j| !cache.contains_key(&j.key) && seen.insert(j.key.clone()))
                .collect()
        };
        let results: Vec<Mutex<Option<Result<CellResult>>>> = missing.iter().map(|_| Mutex::new(None)).collect();
        let next = AtomicUsize::new(0);
        let worker = || loop {
            let i = next.fetch_add(1, Ordering::Relaxed);
            if i >= missing.len() {
                break;
            }
            let job = missing[i];
            let outcome = run_cell(spec, job.input, job.variant, job.seed);
            *results[i].lock().unwrap() = Some(outcome);
        };
        let threads = self.threads.min(missing.len()).max(1);
        if threads == 1 {
            worker();
        } else {
            std::thread::scope(|scope| {
                for _ in 0..threads {
                    scope.spawn(worker);
                }
            });
        }
        {
            let mut cache = self.cache.lock().unwrap();
            for (job, slot) in missing.iter().zip(results) {
                let cell = slot.into_inner().unwrap().expect("every job ran")?;
                cache.insert(job.key.clone(), Arc::new(cell));
            }
        }
        let cache = self.cache.lock().unwrap();
        let cells = jobs.iter().map(|j| Arc::clone(&cache[&j.key])).collect();
        Ok(Report::new(spec, cells))
    }
}

fn signal_digest(s: &Signal) -> String {
    let mut h = Sha256::new();
    for d in s.shape() {
        h.update((*d as u64).to_le_bytes());
    }
    h.update([s.modality().tag()]);
    for v in s.data() {
        h.update(v.to_le_bytes());
    }
    h.finalize()[..8].iter().map(|b| format!("{b:02x}")).collect()
}

fn cell_key(spec: &ExperimentSpec, digest: &str, variant: &Variant, seed: u64) -> String {
    format!(
        "{digest}|{variant:?}|{:?}|{:?}|{}|{:?}|{:?}|{seed}",
        spec.backbone, spec.network, spec.lr, spec.checkpoints, spec.sym
    )
}

fn run_cell(spec: &ExperimentSpec, input: &Input, variant: &Variant, seed: u64) -> Result<CellResult> {
    let original = &input.signal;
    let started = Instant::now();
    let (transformed, params) = variant.apply(original, &spec.sym)?;
    let transform_seconds = started.elapsed().as_secs_f64();
    let (a, b) = (spec.sym.a, spec.sym.b);
    let original_summary = TransformSummary::of(original, a, b, 0.0)?;
    let transformed_summary = TransformSummary::of(&transformed, a, b, transform_seconds)?;

    let mut network = NetworkState::init(&network_for(spec, original, seed))?;
    let target = FitTarget::new(transformed, params.clone(), original.clone(), peak_for(original))?;
    let cfg = TrainConfig {
        lr: spec.lr,
        iterations: spec.iterations(),
        eval_every: 0,
        checkpoints: spec.checkpoints.clone(),
    };
    let fit = train(&mut network, &target, &cfg)?;
    if let Some(it) = fit.diverged_at {
        log::warn!("{} / {} / seed {seed}: loss diverged at iteration {it}", input.label, variant);
    }
    Ok(CellResult {
        input: input.label.clone(),
        variant: variant.label(),
        seed,
        params,
        original: original_summary,
        transformed: transformed_summary,
        trace: fit.trace,
        diverged_at: fit.diverged_at,
        fit_seconds: fit.wall_time.as_secs_f64(),
        reconstruction: fit.reconstruction,
        network,
        sample_rate: input.sample_rate,
    })
}
