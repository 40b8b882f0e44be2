//! Standard-library companion to `scma-core`: reference codebooks, codebook and graph
//! files, bit labeling, and the Monte Carlo link simulator behind the `scma` tool.

pub mod bits;
pub mod codebook_file;
mod error;
pub mod golden;
pub mod graph_file;
pub mod power;
pub mod sim;
pub mod stats;
pub mod validate;

pub use error::{Result, SimError};
