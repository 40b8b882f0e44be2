//! Sparse code multiple access (SCMA) for real-valued, intensity-modulated channels.
//!
//! The crate covers four layers:
//!
//! * [`graph`], [`codebook`] and [`algebra`]: the resource/user factor graph, sparse
//!   codebooks and the column-wise Kronecker sum/difference algebra that builds the
//!   superimposed constellation.
//! * [`symmetric`] and [`complexity`]: the Hadamard-signed symmetric codebook family,
//!   difference sets and the design-problem size accounting.
//! * [`designer`]: the minimum-distance constrained power minimization, solved by
//!   successive linearization around feasible iterates.
//! * [`detector`]: message-passing multiuser detection with an exhaustive MAP oracle.
//!
//! The crate is `no_std` (with `alloc`) when the default `std` feature is disabled.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod algebra;
pub mod codebook;
pub mod complexity;
pub mod designer;
pub mod detector;
mod error;
pub mod graph;
mod math;
pub mod matrix;
pub mod symmetric;

pub use codebook::{Codebook, Gains};
pub use complexity::{complexity_report, ComplexityReport, Scheme};
pub use error::{Error, Result};
pub use graph::{FactorGraph, MappingMatrix, Overload};
pub use matrix::Matrix;
