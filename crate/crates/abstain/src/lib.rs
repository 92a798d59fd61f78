//! Numerical toolkit for quantum and classical hypothesis testing with
//! inconclusive outcomes.
//!
//! The crate computes Rényi-type divergences, the achievable regions of
//! error and conclusiveness exponents, exact finite-n statistics of
//! type-based classical tests, pinched k-copy rates, and Monte Carlo runs
//! of an adaptive sequential measurement protocol. All logarithms are
//! natural; conversion to bits happens only when results are presented.

pub mod classical;
pub mod divergences;
pub mod error;
pub mod io;
pub mod linalg;
pub mod measured;
pub mod optimize;
pub mod pinching;
pub mod regions;
pub mod sequential;
pub mod states;
pub mod types;

pub use error::{Error, Result};
