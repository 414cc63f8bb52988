//! Numerics for Lyapunov exponents of quasiperiodic `M(2,C)` cocycles.
//!
//! Modules build on each other in order: [`torus`] (frequency arithmetic),
//! [`cocycle`] (matrix functions and iterates), [`lyapunov`] (integrated
//! exponents), then the [`avalanche`], [`deviation`] and [`multiscale`]
//! experiment layers.

// `!(x > 0.0)` is used deliberately so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod avalanche;
pub mod cocycle;
pub mod deviation;
pub mod error;
pub mod format;
pub mod lyapunov;
pub mod multiscale;
pub mod sum;
pub mod torus;

pub use error::{Error, Result};
