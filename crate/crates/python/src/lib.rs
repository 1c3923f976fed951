//! Python bindings: signals, the transforms, metrics and a single-network fit.

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use sympower::harness::peak_for;
use sympower::inr::{train, Activation, FitTarget, NetworkConfig, NetworkState, TrainConfig};
use sympower::transform::{apply, sym_power_forward};
use sympower::{Error, Modality, SymPowerConfig, TransformKind};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Io(e) => PyIOError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn parse_modality(name: &str) -> PyResult<Modality> {
    Ok(match name {
        "audio" => Modality::Audio1D,
        "image" => Modality::Image2D,
        "volume" => Modality::Volume3D,
        "synthetic" => Modality::Synthetic,
        _ => return Err(PyValueError::new_err(format!("unknown modality {name:?}"))),
    })
}

fn modality_name(m: Modality) -> &'static str {
    match m {
        Modality::Audio1D => "audio",
        Modality::Image2D => "image",
        Modality::Volume3D => "volume",
        Modality::Synthetic => "synthetic",
    }
}

/// Dense samples with a shape and a modality ("audio", "image", "volume" or "synthetic").
#[pyclass(name = "Signal", module = "pysympower", from_py_object)]
#[derive(Clone)]
pub struct PySignal {
    inner: sympower::Signal,
}

#[pymethods]
impl PySignal {
    #[new]
    #[pyo3(signature = (data, shape=None, modality="synthetic"))]
    fn new(data: Vec<f64>, shape: Option<Vec<usize>>, modality: &str) -> PyResult<Self> {
        let shape = shape.unwrap_or_else(|| vec![data.len()]);
        let inner = sympower::Signal::new(data, shape, parse_modality(modality)?).map_err(to_py)?;
        Ok(Self { inner })
    }

    #[getter]
    fn data(&self) -> Vec<f64> {
        self.inner.data().to_vec()
    }

    #[getter]
    fn shape(&self) -> Vec<usize> {
        self.inner.shape().to_vec()
    }

    #[getter]
    fn modality(&self) -> &'static str {
        modality_name(self.inner.modality())
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!("Signal(shape={:?}, modality={:?})", self.inner.shape(), self.modality())
    }
}

/// Parameters recorded by a forward transform; enough to invert it exactly.
#[pyclass(name = "TransformParams", module = "pysympower", from_py_object)]
#[derive(Clone)]
pub struct PyParams {
    inner: sympower::TransformParams,
}

#[pymethods]
impl PyParams {
    #[getter]
    fn kind(&self) -> String {
        self.inner.kind.label()
    }

    #[getter]
    fn beta(&self) -> f64 {
        self.inner.beta
    }

    #[getter]
    fn beta_plus(&self) -> f64 {
        self.inner.beta_plus
    }

    #[getter]
    fn pads(&self) -> (f64, f64) {
        (self.inner.pad0, self.inner.pad1)
    }

    #[getter]
    fn data_range(&self) -> (f64, f64) {
        (self.inner.y_min, self.inner.y_max)
    }

    #[getter]
    fn bound(&self) -> (f64, f64) {
        (self.inner.a, self.inner.b)
    }

    fn digest(&self) -> String {
        self.inner.digest()
    }

    /// Maps a transformed signal back; out-of-bound samples are clamped first.
    fn invert(&self, t: &PySignal) -> PyResult<PySignal> {
        let inv = self.inner.invert(&t.inner).map_err(to_py)?;
        Ok(PySignal { inner: inv.signal })
    }

    fn __repr__(&self) -> String {
        format!(
            "TransformParams(kind={:?}, beta={}, beta_plus={})",
            self.kind(),
            self.inner.beta,
            self.inner.beta_plus
        )
    }
}

#[pyfunction]
#[pyo3(signature = (
    signal, a=-1.0, b=1.0, lam=0.5, xi=0.5, tau=0.1, kappa=256.0,
    use_power=true, use_calibration=true, use_soft_boundary=true,
))]
#[allow(clippy::too_many_arguments)]
fn sym_power(
    signal: &PySignal,
    a: f64,
    b: f64,
    lam: f64,
    xi: f64,
    tau: f64,
    kappa: f64,
    use_power: bool,
    use_calibration: bool,
    use_soft_boundary: bool,
) -> PyResult<(PySignal, PyParams)> {
    let cfg = SymPowerConfig {
        a,
        b,
        lambda: lam,
        xi,
        tau,
        kappa,
        use_power,
        use_calibration,
        use_soft_boundary,
        ..Default::default()
    };
    let (t, p) = sym_power_forward(&signal.inner, &cfg).map_err(to_py)?;
    Ok((PySignal { inner: t }, PyParams { inner: p }))
}

/// Applies a transform by label, e.g. "scale1", "gamma0.5", "boxcox", "sympower".
#[pyfunction]
#[pyo3(name = "apply", signature = (signal, kind, a=-1.0, b=1.0))]
fn apply_kind(signal: &PySignal, kind: &str, a: f64, b: f64) -> PyResult<(PySignal, PyParams)> {
    let kind = TransformKind::parse(kind).map_err(to_py)?;
    let (t, p) = apply(&signal.inner, kind, a, b).map_err(to_py)?;
    Ok((PySignal { inner: t }, PyParams { inner: p }))
}

#[pyfunction]
fn comparison_set(seed: u64) -> Vec<String> {
    TransformKind::comparison_set(seed).iter().map(|k| k.label()).collect()
}

#[pyfunction]
fn mse(pred: &PySignal, truth: &PySignal) -> PyResult<f64> {
    sympower::metrics::mse(&pred.inner, &truth.inner).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (pred, truth, peak=None))]
fn psnr(pred: &PySignal, truth: &PySignal, peak: Option<f64>) -> PyResult<f64> {
    let peak = peak.unwrap_or_else(|| peak_for(&truth.inner));
    sympower::metrics::psnr(&pred.inner, &truth.inner, peak).map_err(to_py)
}

#[pyfunction]
fn ssim(pred: &PySignal, truth: &PySignal) -> PyResult<f64> {
    sympower::metrics::ssim(&pred.inner, &truth.inner).map_err(to_py)
}

#[pyfunction]
fn skewness(signal: &PySignal) -> PyResult<f64> {
    sympower::skewness_metric(&signal.inner).map_err(to_py)
}

#[pyfunction]
fn load_image(path: &str) -> PyResult<PySignal> {
    Ok(PySignal {
        inner: sympower::io::load_image(path).map_err(to_py)?,
    })
}

#[pyfunction]
fn save_image(signal: &PySignal, path: &str) -> PyResult<()> {
    sympower::io::save_image(&signal.inner, path).map_err(to_py)
}

/// Transforms `signal`, fits one sine network to it and returns a dict with
/// the PSNR trace (original domain) and the reconstruction.
#[pyfunction]
#[pyo3(signature = (
    signal, transform="sympower", iterations=1000, lr=1e-4,
    hidden_layers=3, width=64, finer=false, seed=0,
))]
#[allow(clippy::too_many_arguments)]
fn fit<'py>(
    py: Python<'py>,
    signal: &PySignal,
    transform: &str,
    iterations: usize,
    lr: f64,
    hidden_layers: usize,
    width: usize,
    finer: bool,
    seed: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let original = &signal.inner;
    let kind = TransformKind::parse(transform).map_err(to_py)?;
    let (t, p) = apply(original, kind, -1.0, 1.0).map_err(to_py)?;
    let net = NetworkConfig {
        hidden_layers,
        width,
        in_dim: original.coord_shape().len(),
        out_dim: original.channels(),
        activation: if finer { Activation::FinerSine } else { Activation::Sine },
        seed,
        ..NetworkConfig::default()
    };
    let target = FitTarget::new(t, p, original.clone(), peak_for(original)).map_err(to_py)?;
    let cfg = TrainConfig {
        lr,
        iterations,
        eval_every: (iterations / 10).max(1),
        checkpoints: vec![iterations],
    };
    let report = py
        .detach(|| {
            let mut state = NetworkState::init(&net)?;
            train(&mut state, &target, &cfg)
        })
        .map_err(to_py)?;

    let out = PyDict::new(py);
    let iters: Vec<usize> = report.trace.iter().map(|p| p.iteration).collect();
    let psnrs: Vec<f64> = report.trace.iter().map(|p| p.quality.psnr).collect();
    let losses: Vec<f64> = report.trace.iter().map(|p| p.loss).collect();
    out.set_item("iterations", iters)?;
    out.set_item("psnr", psnrs)?;
    out.set_item("loss", losses)?;
    out.set_item("diverged_at", report.diverged_at)?;
    out.set_item("seconds", report.wall_time.as_secs_f64())?;
    out.set_item("reconstruction", report.reconstruction.map(|inner| PySignal { inner }))?;
    Ok(out)
}

#[pymodule]
pub fn pysympower(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySignal>()?;
    m.add_class::<PyParams>()?;
    m.add_function(wrap_pyfunction!(sym_power, m)?)?;
    m.add_function(wrap_pyfunction!(apply_kind, m)?)?;
    m.add_function(wrap_pyfunction!(comparison_set, m)?)?;
    m.add_function(wrap_pyfunction!(mse, m)?)?;
    m.add_function(wrap_pyfunction!(psnr, m)?)?;
    m.add_function(wrap_pyfunction!(ssim, m)?)?;
    m.add_function(wrap_pyfunction!(skewness, m)?)?;
    m.add_function(wrap_pyfunction!(load_image, m)?)?;
    m.add_function(wrap_pyfunction!(save_image, m)?)?;
    m.add_function(wrap_pyfunction!(fit, m)?)?;
    Ok(())
}
