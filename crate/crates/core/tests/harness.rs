use sympower::harness::{
    run_ablation, run_compare, run_fit, run_hypothesis, ExperimentSpec, InputSource, Metric, Runner, Task, Variant,
    CSV_HEADER,
};
use sympower::io::{SyntheticKind, SyntheticSpec};
use sympower::TransformKind;

fn leaves(side: usize, seed: u64) -> InputSource {
    InputSource::Synthetic(SyntheticSpec::new(SyntheticKind::DeadLeaves, &[side, side], seed))
}

fn tiny(task: Task, inputs: Vec<InputSource>) -> ExperimentSpec {
    let mut spec = ExperimentSpec::new(task, inputs);
    spec.seeds = vec![0, 1];
    spec.checkpoints = vec![5, 20];
    spec.network.width = 8;
    spec.network.hidden_layers = 2;
    spec
}

#[test]
fn shared_cells_are_fitted_once() {
    let runner = Runner::new(2);
    let mut compare = tiny(Task::CompareTransforms, vec![leaves(16, 0)]);
    compare.variants = vec![
        Variant::Transform(TransformKind::Scale(1.0)),
        Variant::Transform(TransformKind::SymPower),
    ];
    let first = run_compare(&runner, &compare).unwrap();
    assert_eq!(runner.cached_cells(), 4);

    let ablation = tiny(Task::Ablation, vec![leaves(16, 0)]);
    let report = run_ablation(&runner, &ablation).unwrap();
    // scale1 is shared; the ablation's "full" carries a different label
    assert_eq!(runner.cached_cells(), 4 + 5 * 2);
    assert_eq!(report.cells().len(), 12);
    let a = first.mean("scale1", 20, Metric::Psnr).unwrap();
    let b = report.mean("scale1", 20, Metric::Psnr).unwrap();
    assert_eq!(a.to_bits(), b.to_bits());
    assert_eq!(
        report.mean("full", 20, Metric::Psnr).unwrap().to_bits(),
        first.mean("sympower", 20, Metric::Psnr).unwrap().to_bits()
    );
}

#[test]
fn csv_is_long_format_and_reproducible() {
    let spec = tiny(Task::HypothesisRange, vec![leaves(12, 3)]);
    let one = run_hypothesis(&Runner::new(1), &spec).unwrap();
    let two = run_hypothesis(&Runner::new(3), &spec).unwrap();
    assert_eq!(one.csv(false), two.csv(false));

    let csv = one.csv(true);
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), CSV_HEADER);
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert!(rows.iter().all(|r| r.len() == 10 && r[0] == "range" && r[3] == "sine"));
    // 5 factors x 2 seeds x (5 statistics + 2 checkpoints x (loss, psnr, ssim))
    assert_eq!(rows.len(), 5 * 2 * (5 + 2 * 3));
    let range_rows: Vec<f64> = rows
        .iter()
        .filter(|r| r[7] == "range" && r[4] == "0")
        .map(|r| r[8].parse().unwrap())
        .collect();
    assert_eq!(range_rows, vec![0.25, 0.5, 1.0, 2.0, 4.0]);
    assert!(!one.csv(false).lines().next().unwrap().contains("wall_seconds"));
}

#[test]
fn summary_lists_every_variant() {
    let spec = tiny(Task::Ablation, vec![leaves(12, 1)]);
    let report = run_ablation(&Runner::new(1), &spec).unwrap();
    let summary = report.summary();
    for v in ["scale1", "wo_basic", "wo_cali", "wo_soft", "wo_cali_soft", "full"] {
        assert!(summary.lines().any(|l| l.starts_with(v)), "{v}");
    }
    let psnr = report.final_means(Metric::Psnr);
    assert_eq!(psnr.len(), 6);
    assert!(psnr.values().all(|p| p.is_finite()));
    assert!(!report.diverged());
}

#[test]
fn fit_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let speech = InputSource::Synthetic(SyntheticSpec::new(
        SyntheticKind::SpeechLike { sample_rate: 8000 },
        &[400],
        0,
    ));
    let mut spec = tiny(Task::FitAudio, vec![speech]);
    spec.seeds = vec![0];
    let report = run_fit(&Runner::new(1), &spec, Some(dir.path())).unwrap();
    assert!(report.mean("sympower", 20, Metric::SiSnr).is_some());
    let names: Vec<String> = std::fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    for suffix in [".wav", ".sptn", ".sptp", "_trace.csv"] {
        assert_eq!(names.iter().filter(|n| n.ends_with(suffix)).count(), 2, "{suffix}: {names:?}");
    }

    let volume = InputSource::Synthetic(SyntheticSpec::new(SyntheticKind::MovingBlobs, &[4, 8, 8], 0));
    let mut spec = tiny(Task::FitVolume, vec![volume]);
    spec.seeds = vec![0];
    run_fit(&Runner::new(1), &spec, Some(dir.path())).unwrap();
    let spt = std::fs::read_dir(dir.path())
        .unwrap()
        .filter(|e| e.as_ref().unwrap().path().extension().is_some_and(|x| x == "spt"))
        .count();
    assert_eq!(spt, 2);
}

#[test]
fn rejects_bad_specs() {
    let runner = Runner::new(1);
    let spec = tiny(Task::Ablation, vec![leaves(12, 0)]);
    assert!(run_compare(&runner, &spec).is_err());
    let mut bad = spec.clone();
    bad.checkpoints = vec![20, 5];
    assert!(run_ablation(&runner, &bad).is_err());
    let mut bad = spec.clone();
    bad.seeds.clear();
    assert!(run_ablation(&runner, &bad).is_err());
    let missing = tiny(
        Task::CompareTransforms,
        vec![InputSource::File("does/not/exist.pgm".into())],
    );
    assert!(run_compare(&runner, &missing).is_err());
    assert_eq!(runner.cached_cells(), 0);
}
