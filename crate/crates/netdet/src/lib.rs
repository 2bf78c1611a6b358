//! Network detection at desk scale: harmonic space-time threat propagation,
//! spectral and modularity community detection, a covert-network stochastic
//! blockmodel generator, and a Monte-Carlo ROC evaluation harness.

#![forbid(unsafe_code)]
// Negated comparisons like `!(x > 0.0)` reject NaN; `x <= 0.0` would let it
// through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bicg;
pub mod blockmodel;
pub mod config;
pub mod error;
pub mod eval;
pub mod graph;
pub mod io;
pub mod matrix;
pub mod spectral;
pub mod sttp;

pub use error::{Error, Result};
