//! Robust fitting of the generalized extreme-value (GEV) distribution by
//! minimum density power divergence, with the supporting distribution
//! calculus, asymptotic covariance, influence diagnostics and a Monte-Carlo
//! harness for contamination studies.

pub mod asymptotics;
pub mod calculus;
pub mod cli;
pub mod error;
pub mod gev;
pub mod ingest;
pub mod mdpd;
pub mod metrics;
mod optim;
pub mod quad;
pub mod simlab;

pub use error::{Error, Result};
pub use gev::{GevParams, Support};
