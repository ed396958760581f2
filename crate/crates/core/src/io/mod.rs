//! File formats.

mod flow;
mod pnm;

pub use flow::{decode_flow, encode_flow, read_flow, write_flow};
pub use pnm::{decode_pnm, encode_pnm, read_image, write_image};
