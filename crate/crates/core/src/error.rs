use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("signal has no samples")]
    EmptySignal,
    #[error("sample {index} is not finite ({value})")]
    NonFinite { index: usize, value: f64 },
    #[error("shape mismatch: expected {expected:?}, got {actual:?}")]
    ShapeMismatch {
        expected: Vec<usize>,
        actual: Vec<usize>,
    },
    #[error("standard deviation is zero; skewness undefined")]
    DegenerateStd,
    #[error("stats were built without a sorted sample copy")]
    MissingSamples,
    #[error("histograms have different layouts ({left} vs {right} bins)")]
    MismatchedBins { left: usize, right: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("unsupported format: {0}")]
    UnsupportedFormat(String),
    #[error("corrupt header: {0}")]
    CorruptHeader(String),
    #[error("unsupported encoding: {0}")]
    UnsupportedEncoding(String),
    #[error("image side {side} is smaller than the {window}x{window} window")]
    TooSmall { side: usize, window: usize },
    #[error("target signal is all zero")]
    ZeroTarget,
    #[error("loss became non-finite at iteration {iteration}")]
    DivergenceDetected { iteration: usize },
    #[error(transparent)]
    Io(#[from] io::Error),
}
