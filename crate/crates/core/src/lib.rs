//! Exact and entropic optimal transport, grid divergences, support overlap
//! on embedded charts and generator-gradient audits, plus the experiment
//! drivers behind the `alignlab` binary.

// `!(x < y)` is used on purpose so that NaN lands on the rejecting side.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod divergence;
pub mod error;
pub mod experiments;
pub mod gradients;
pub mod manifolds;
pub mod transport;

pub use error::{Error, Result};
