//! Symmetric power transformation for implicit neural representations.
//!
//! The crate bundles the transform itself (with exact inversion), the
//! comparison transforms it is measured against, a small sine-network
//! trainer, quality metrics, signal IO and an experiment harness.

pub mod container;
pub mod error;
pub mod harness;
pub mod inr;
pub mod io;
pub mod metrics;
pub mod signal;
pub mod stats;
pub mod transform;

pub use error::{Error, Result};
pub use signal::{Modality, Signal};
pub use stats::{compute_stats, range_metric, skewness_metric, spearman, SignalStats};
pub use transform::{SymPowerConfig, TransformKind, TransformParams};
