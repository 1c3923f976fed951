//! Signal files (Netpbm, WAV), synthetic generators and coordinate grids.

mod grid;
mod netpbm;
pub mod synth;
mod wav;

pub use grid::coord_grid;
pub use netpbm::{decode_image, encode_image, load_image, save_image};
pub use synth::{generate, Generated, SyntheticKind, SyntheticSpec};
pub use wav::{decode_wav, encode_wav, load_wav, save_wav, Audio};
