//! Sine-activated coordinate networks and their training loop.

mod adam;
mod checkpoint;
mod network;
mod train;
mod trig;

pub use adam::Adam;
pub use checkpoint::{decode_network, encode_network, load_network, save_network};
pub use network::{Activation, LayerSpan, NetworkConfig, NetworkState, Tape};
pub(crate) use network::mean_sq_diff;
pub use train::{train, FitReport, FitTarget, TracePoint, TrainConfig};
