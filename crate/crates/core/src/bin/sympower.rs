use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use sympower::container::{read_tensor, write_tensor};
use sympower::harness::{
    deviation_sweep_inputs, run_ablation, run_compare, run_fit, run_hypothesis, skew_sweep_inputs,
    ExperimentSpec, InputSource, Report, Runner, Task, Variant,
};
use sympower::inr::Activation;
use sympower::io::{generate, save_image, save_wav, Audio, SyntheticKind, SyntheticSpec};
use sympower::transform::{self, read_params, sym_power_forward, write_params, SymPowerConfig};
use sympower::{compute_stats, Error, Modality, Result, Signal, TransformKind};

#[derive(Parser)]
#[command(name = "sympower", version, about = "Symmetric power transformation and sine-network fitting experiments")]
struct Cli {
    /// Worker threads for experiment grids (default: all cores).
    #[arg(long, global = true, env = "SYMPOWER_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Transform a signal and write the result plus its parameter sidecar.
    Transform(TransformArgs),
    /// Undo a transform using its sidecar.
    Invert(InvertArgs),
    /// Fit networks to images, audio or volumes and write reconstructions.
    Fit(FitArgs),
    /// Compare every transform on the given images.
    Compare(GridArgs),
    /// Range, skewness or deviation sweep.
    Hypothesis(HypothesisArgs),
    /// Sym-power ablation against the scale(1) baseline.
    Ablate(GridArgs),
    /// Write a synthetic signal.
    Gen(GenArgs),
}

#[derive(Args, Clone)]
struct SymArgs {
    #[arg(long, default_value_t = 0.5)]
    xi: f64,
    #[arg(long, default_value_t = 0.1)]
    tau: f64,
    #[arg(long, default_value_t = 256.0)]
    kappa: f64,
    #[arg(long, default_value_t = 0.5)]
    lambda: f64,
}

impl SymArgs {
    fn config(&self) -> SymPowerConfig {
        SymPowerConfig {
            xi: self.xi,
            tau: self.tau,
            kappa: self.kappa,
            lambda: self.lambda,
            ..Default::default()
        }
    }
}

#[derive(Args, Clone)]
struct TrainArgs {
    /// Comma-separated evaluation iterations; the last is the run length.
    #[arg(long, default_value = "100,300,500,1000", value_delimiter = ',')]
    iters: Vec<usize>,
    /// Comma-separated network seeds.
    #[arg(long, default_value = "0,1,2,3,4", value_delimiter = ',')]
    seeds: Vec<u64>,
    #[arg(long, default_value_t = 1e-4)]
    lr: f64,
    /// Frequency scale of the sine layers (default 30, or 100 for audio).
    #[arg(long)]
    omega0: Option<f64>,
    #[arg(long, default_value_t = 64)]
    width: usize,
    /// Number of sine layers.
    #[arg(long, default_value_t = 3)]
    layers: usize,
    #[arg(long, value_enum, default_value_t = Backbone::Sine)]
    backbone: Backbone,
    /// Output directory for reports and artifacts.
    #[arg(long, env = "SYMPOWER_OUT", default_value = "sympower-out")]
    out_dir: PathBuf,
    #[command(flatten)]
    sym: SymArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum Backbone {
    Sine,
    Finer,
}

#[derive(Args)]
struct TransformArgs {
    input: PathBuf,
    /// Output tensor (`.spt`).
    #[arg(long)]
    out: PathBuf,
    /// Parameter sidecar (`.sptp`); defaults to the output path with that extension.
    #[arg(long)]
    params: Option<PathBuf>,
    /// Transform label: sympower, norm01, zscore, gammaG, scaleK, inverse, rppSEED, boxcox.
    #[arg(long, default_value = "sympower")]
    kind: String,
    #[arg(long)]
    no_power: bool,
    #[arg(long)]
    no_calibration: bool,
    #[arg(long)]
    no_soft_boundary: bool,
    #[command(flatten)]
    sym: SymArgs,
}

#[derive(Args)]
struct InvertArgs {
    /// Transformed tensor (`.spt`).
    input: PathBuf,
    #[arg(long)]
    params: PathBuf,
    /// Output file; `.pgm`/`.ppm`/`.wav` write that format, anything else a tensor.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct FitArgs {
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    /// Comma-separated transform labels to fit.
    #[arg(long, default_value = "scale1,sympower", value_delimiter = ',')]
    transforms: Vec<String>,
    #[command(flatten)]
    train: TrainArgs,
}

#[derive(Args)]
struct GridArgs {
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    #[command(flatten)]
    train: TrainArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum Sweep {
    Range,
    Skew,
    Deviation,
}

#[derive(Args)]
struct HypothesisArgs {
    #[arg(value_enum)]
    sweep: Sweep,
    /// Image for the range sweep.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Means of the skewness sweep.
    #[arg(long, default_value = "-1,-0.75,-0.5,-0.25,0,0.25,0.5,0.75,1", value_delimiter = ',', allow_hyphen_values = true)]
    mus: Vec<f64>,
    /// Standard deviation used by the skewness sweep.
    #[arg(long, default_value_t = 0.4)]
    sigma: f64,
    /// Standard deviations of the deviation sweep.
    #[arg(long, default_value = "0.3,0.4,0.5,0.7,1,2", value_delimiter = ',')]
    sigmas: Vec<f64>,
    /// Side length of the synthetic images.
    #[arg(long, default_value_t = 64)]
    side: usize,
    /// Seed of the synthetic images.
    #[arg(long, default_value_t = 0)]
    data_seed: u64,
    #[command(flatten)]
    train: TrainArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum GenKind {
    Normal,
    Lognormal,
    Text,
    Gradient,
    Constant,
    Leaves,
    Speech,
    Blobs,
}

#[derive(Args)]
struct GenArgs {
    #[arg(value_enum)]
    kind: GenKind,
    /// Extents, e.g. `64x64`, `16000` or `8x32x32`.
    #[arg(long, default_value = "64x64")]
    shape: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    mu: f64,
    #[arg(long, default_value_t = 0.5)]
    sigma: f64,
    #[arg(long, default_value_t = 4)]
    levels: usize,
    #[arg(long, default_value_t = 0.5)]
    value: f64,
    #[arg(long, default_value_t = 16_000)]
    sample_rate: u32,
    /// `.pgm`, `.wav` or `.spt`.
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let runner = match cli.threads {
        Some(n) => Runner::new(n),
        None => Runner::default(),
    };
    match dispatch(cli.command, &runner) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("at least one cell diverged");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

/// Returns whether every fit stayed finite.
fn dispatch(command: Command, runner: &Runner) -> Result<bool> {
    match command {
        Command::Transform(args) => transform_cmd(args).map(|_| true),
        Command::Invert(args) => invert_cmd(args).map(|_| true),
        Command::Gen(args) => gen_cmd(args).map(|_| true),
        Command::Fit(args) => {
            let inputs = files(&args.inputs);
            let task = fit_task(&args.inputs)?;
            let mut spec = experiment(task, inputs, &args.train);
            spec.variants = args
                .transforms
                .iter()
                .map(|l| TransformKind::parse(l).map(Variant::Transform))
                .collect::<Result<_>>()?;
            let dir = args.train.out_dir.join(task.label());
            let report = run_fit(runner, &spec, Some(&dir))?;
            finish(&report, &args.train.out_dir)
        }
        Command::Compare(args) => {
            let spec = experiment(Task::CompareTransforms, files(&args.inputs), &args.train);
            finish(&run_compare(runner, &spec)?, &args.train.out_dir)
        }
        Command::Ablate(args) => {
            let mut spec = experiment(Task::Ablation, files(&args.inputs), &args.train);
            spec.variants = Variant::ablation_set(&spec.sym);
            finish(&run_ablation(runner, &spec)?, &args.train.out_dir)
        }
        Command::Hypothesis(args) => {
            let (task, inputs) = match args.sweep {
                Sweep::Range => {
                    let path = args.input.clone().ok_or_else(|| {
                        Error::InvalidParameter("the range sweep needs --input".into())
                    })?;
                    (Task::HypothesisRange, vec![InputSource::File(path)])
                }
                Sweep::Skew => (
                    Task::HypothesisSkew,
                    skew_sweep_inputs(&args.mus, args.sigma, args.side, args.data_seed),
                ),
                Sweep::Deviation => (
                    Task::HypothesisDeviation,
                    deviation_sweep_inputs(&args.sigmas, args.side, args.data_seed),
                ),
            };
            let spec = experiment(task, inputs, &args.train);
            finish(&run_hypothesis(runner, &spec)?, &args.train.out_dir)
        }
    }
}

fn files(paths: &[PathBuf]) -> Vec<InputSource> {
    paths.iter().cloned().map(InputSource::File).collect()
}

fn fit_task(paths: &[PathBuf]) -> Result<Task> {
    let first = InputSource::File(paths[0].clone()).load()?;
    Ok(match first.signal.modality() {
        Modality::Audio1D => Task::FitAudio,
        Modality::Volume3D => Task::FitVolume,
        _ => Task::FitImage,
    })
}

fn experiment(task: Task, inputs: Vec<InputSource>, t: &TrainArgs) -> ExperimentSpec {
    let mut spec = ExperimentSpec::new(task, inputs);
    spec.checkpoints = t.iters.clone();
    spec.seeds = t.seeds.clone();
    spec.lr = t.lr;
    spec.backbone = match t.backbone {
        Backbone::Sine => Activation::Sine,
        Backbone::Finer => Activation::FinerSine,
    };
    spec.network.width = t.width;
    spec.network.hidden_layers = t.layers;
    if let Some(w) = t.omega0 {
        spec.network.omega0 = w;
    }
    spec.sym = t.sym.config();
    if task == Task::Ablation {
        spec.variants = Variant::ablation_set(&spec.sym);
    }
    spec
}

fn finish(report: &Report, out_dir: &Path) -> Result<bool> {
    std::fs::create_dir_all(out_dir)?;
    let path = out_dir.join(format!("{}.csv", report.task.label()));
    std::fs::write(&path, report.csv(true))?;
    print!("{}", report.summary());
    println!("report: {}", path.display());
    Ok(!report.diverged())
}

fn transform_cmd(args: TransformArgs) -> Result<()> {
    let input = InputSource::File(args.input.clone()).load()?;
    let kind = TransformKind::parse(&args.kind)?;
    let mut cfg = args.sym.config();
    cfg.use_power = !args.no_power;
    cfg.use_calibration = !args.no_calibration;
    cfg.use_soft_boundary = !args.no_soft_boundary;
    let (t, params) = match kind {
        TransformKind::SymPower => sym_power_forward(&input.signal, &cfg)?,
        other => transform::apply_baseline(&input.signal, other, cfg.a, cfg.b)?,
    };
    write_tensor(&args.out, &t)?;
    let sidecar = args.params.unwrap_or_else(|| args.out.with_extension("sptp"));
    write_params(&sidecar, &params)?;
    let stats = compute_stats(&t, 256)?;
    println!(
        "{}: beta {:.4} beta+ {:.4} pads {:.4}/{:.4} skew {:.4} -> {:.4} hash {}",
        kind.label(),
        params.beta,
        params.beta_plus,
        params.pad0,
        params.pad1,
        compute_stats(&input.signal, 256)?.skewness,
        stats.skewness,
        params.digest()
    );
    Ok(())
}

fn invert_cmd(args: InvertArgs) -> Result<()> {
    let t = read_tensor(&args.input)?;
    let params = read_params(&args.params)?;
    let inverted = transform::invert(&t, &params)?;
    if inverted.clamped > 0 {
        log::warn!("{} samples were outside the transform's bound", inverted.clamped);
    }
    write_signal(&inverted.signal, &args.out, 16_000)
}

fn write_signal(s: &Signal, path: &Path, sample_rate: u32) -> Result<()> {
    let ext = path
        .extension()
        .map(|e| e.to_string_lossy().to_ascii_lowercase())
        .unwrap_or_default();
    match ext.as_str() {
        "pgm" | "ppm" => save_image(s, path),
        "wav" => {
            let audio = Audio {
                signal: Signal::new(s.data().to_vec(), vec![s.len()], Modality::Audio1D)?,
                sample_rate,
            };
            save_wav(&audio, path)
        }
        _ => write_tensor(path, s),
    }
}

fn gen_cmd(args: GenArgs) -> Result<()> {
    let shape: Vec<usize> = args
        .shape
        .split('x')
        .map(|p| p.trim().parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::InvalidParameter(format!("bad shape '{}'", args.shape)))?;
    let kind = match args.kind {
        GenKind::Normal => SyntheticKind::NormalClipped { mu: args.mu, sigma: args.sigma },
        GenKind::Lognormal => SyntheticKind::Lognormal { mu: args.mu, sigma: args.sigma },
        GenKind::Text => SyntheticKind::TextLike { levels: args.levels },
        GenKind::Gradient => SyntheticKind::GradientImage,
        GenKind::Constant => SyntheticKind::ConstantImage(args.value),
        GenKind::Leaves => SyntheticKind::DeadLeaves,
        GenKind::Speech => SyntheticKind::SpeechLike { sample_rate: args.sample_rate },
        GenKind::Blobs => SyntheticKind::MovingBlobs,
    };
    let spec = SyntheticSpec::new(kind, &shape, args.seed);
    let g = generate(&spec)?;
    write_signal(&g.signal, &args.out, args.sample_rate)?;
    println!("{}: {} samples, skewness {:.4}", spec.label(), g.signal.len(), g.skewness);
    Ok(())
}
