//! Shared pieces of the acceptance run: criterion bookkeeping, bundled
//! inputs and the random-signal generator used by the transform checks.
//!
//! The run itself lives in `tests/acceptance.rs`. It sits in its own package
//! so that `cargo test --workspace` reaches it after every other test target.

use std::path::PathBuf;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal, Normal};

use sympower::harness::{ExperimentSpec, InputSource, Task};
use sympower::{Modality, Signal};

pub const SEEDS: [u64; 5] = [0, 1, 2, 3, 4];
/// PSNR differences below this count as ties.
pub const TIE_DB: f64 = 0.05;

pub fn asset(name: &str) -> InputSource {
    InputSource::File(
        PathBuf::from(env!("CARGO_MANIFEST_DIR"))
            .join("../core/assets")
            .join(name),
    )
}

pub fn natural() -> InputSource {
    asset("natural.pgm")
}

pub fn spec(task: Task, inputs: Vec<InputSource>, checkpoints: Vec<usize>) -> ExperimentSpec {
    let mut s = ExperimentSpec::new(task, inputs);
    s.seeds = SEEDS.to_vec();
    s.checkpoints = checkpoints;
    s
}

/// One PASS/FAIL line per criterion.
#[derive(Default)]
pub struct Outcome {
    pub lines: Vec<String>,
    pub failed: Vec<usize>,
}

impl Outcome {
    pub fn record(&mut self, id: usize, name: &str, pass: bool, detail: String) {
        let line = format!("[{}] C{id:<2} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
        println!("{line}");
        self.lines.push(line);
        if !pass {
            self.failed.push(id);
        }
    }
}

/// A random signal of random shape and modality. Families cover uniform,
/// bell-shaped, right- and left-skewed, and few-level data.
pub fn random_signal(rng: &mut ChaCha8Rng) -> (Signal, &'static str) {
    let (shape, modality): (Vec<usize>, Modality) = match rng.random_range(0..4) {
        0 => (vec![rng.random_range(2..3000)], Modality::Audio1D),
        1 => {
            let c = if rng.random_bool(0.3) { 3 } else { 1 };
            (vec![rng.random_range(1..48), rng.random_range(2..48), c], Modality::Image2D)
        }
        2 => (
            vec![rng.random_range(1..8), rng.random_range(1..16), rng.random_range(2..16), 1],
            Modality::Volume3D,
        ),
        _ => (vec![rng.random_range(2..2000)], Modality::Synthetic),
    };
    let n: usize = shape.iter().product();
    let (family, data): (&'static str, Vec<f64>) = match rng.random_range(0..5) {
        0 => ("uniform", (0..n).map(|_| rng.random::<f64>()).collect()),
        1 => {
            let d = Normal::new(0.0, rng.random_range(0.05..1.0)).unwrap();
            ("normal", (0..n).map(|_| d.sample(rng)).collect())
        }
        2 => {
            let d = LogNormal::new(0.0, rng.random_range(0.1..1.2)).unwrap();
            ("right-skewed", (0..n).map(|_| d.sample(rng) * 0.1).collect())
        }
        3 => {
            let d = LogNormal::new(0.0, rng.random_range(0.1..1.2)).unwrap();
            ("left-skewed", (0..n).map(|_| 1.0 - d.sample(rng) * 0.1).collect())
        }
        _ => {
            let levels = rng.random_range(2..6);
            let values: Vec<f64> = (0..levels).map(|_| rng.random_range(-1.0..1.0)).collect();
            ("few-level", (0..n).map(|_| values[rng.random_range(0..levels)]).collect())
        }
    };
    (Signal::new(data, shape, modality).unwrap(), family)
}

pub fn max_abs_diff(a: &Signal, b: &Signal) -> f64 {
    a.data().iter().zip(b.data()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn random_signals_are_valid_and_seeded() {
        let mut a = ChaCha8Rng::seed_from_u64(1);
        let mut b = ChaCha8Rng::seed_from_u64(1);
        let mut families = std::collections::BTreeSet::new();
        for _ in 0..200 {
            let (x, fx) = random_signal(&mut a);
            let (y, fy) = random_signal(&mut b);
            assert_eq!((x, fx), (y.clone(), fy));
            assert!(y.data().iter().all(|v| v.is_finite()));
            families.insert(fy);
        }
        assert_eq!(families.len(), 5);
    }

    #[test]
    fn bundled_inputs_load() {
        assert_eq!(natural().load().unwrap().signal.shape(), &[64, 64, 1]);
        assert_eq!(asset("text.pgm").load().unwrap().signal.shape(), &[64, 64, 1]);
    }

    #[test]
    fn outcome_tracks_failures() {
        let mut o = Outcome::default();
        o.record(1, "a", true, String::new());
        o.record(2, "b", false, String::new());
        assert_eq!(o.failed, vec![2]);
        assert!(o.lines[1].starts_with("[FAIL] C2"));
    }
}
