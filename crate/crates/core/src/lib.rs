//! Worst-case separable values of two-qubit entanglement witnesses when the
//! detectors are lossy and possibly adversarial.
//!
//! The crate builds the semidefinite programs for the discard and assignment
//! post-processing strategies, solves them with an embedded interior-point
//! method, cross-checks the Bell-witness case against closed-form solutions,
//! and locates critical detection efficiencies.

// `!(x >= lo)` also rejects NaN; Pauli coordinates read best as index loops
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod cli;
pub mod critical;
pub mod error;
pub mod lattice;
pub mod linalg;
pub mod model;
pub mod oracle;
pub mod solver;
pub mod witness;

pub use error::{Error, Result};
