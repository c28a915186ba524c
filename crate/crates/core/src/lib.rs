//! Exact and Monte-Carlo experiments on lacunary sums `Σ f(n_k x)`.

pub mod cli;
pub mod diophantine;
pub mod dyadic;
pub mod error;
pub mod numfmt;
pub mod sequence;
pub mod stats;

pub use error::{Error, Result};
