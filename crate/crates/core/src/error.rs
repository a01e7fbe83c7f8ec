use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("probability {0} is outside (0, 1)")]
    InvalidProbability(f64),

    #[error("x = {x} is not strictly inside the support {lower}..{upper}")]
    OutOfSupport { x: f64, lower: f64, upper: f64 },

    #[error("infeasible parameters: {0}")]
    Infeasible(String),

    #[error("all observations are equal; the GEV scale is not identifiable")]
    DegenerateData,

    #[error("not enough observations: {0}")]
    InsufficientData(String),

    #[error("optimizer did not converge: {0}")]
    NonConvergence(String),

    #[error("xi = {xi} violates the integrability bound xi > {bound} for alpha = {alpha}")]
    IntegrabilityViolation { xi: f64, alpha: f64, bound: f64 },

    #[error("J matrix is numerically singular (condition number {condition:.3e})")]
    SingularJ { condition: f64 },

    #[error("xi = {xi} >= 1: the first moment is infinite")]
    InfiniteMoment { xi: f64 },

    #[error("quadrature failed: {0}")]
    Quadrature(String),

    #[error("cannot read {path}: {source}")]
    FileUnreadable {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("no numeric column found: {0}")]
    NoNumericColumn(String),

    #[error("series is empty: {0}")]
    EmptySeries(String),

    #[error("config error at {path}: {message}")]
    Config { path: String, message: String },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Stable machine-readable category, used by the CLI and the C ABI.
    pub fn category(&self) -> &'static str {
        match self {
            Error::InvalidParameter(_) => "InvalidParameter",
            Error::InvalidProbability(_) => "InvalidProbability",
            Error::OutOfSupport { .. } => "OutOfSupport",
            Error::Infeasible(_) => "Infeasible",
            Error::DegenerateData => "DegenerateData",
            Error::InsufficientData(_) => "InsufficientData",
            Error::NonConvergence(_) => "NonConvergence",
            Error::IntegrabilityViolation { .. } => "IntegrabilityViolation",
            Error::SingularJ { .. } => "SingularJ",
            Error::InfiniteMoment { .. } => "InfiniteMoment",
            Error::Quadrature(_) => "Quadrature",
            Error::FileUnreadable { .. } => "FileUnreadable",
            Error::NoNumericColumn(_) => "NoNumericColumn",
            Error::EmptySeries(_) => "EmptySeries",
            Error::Config { .. } => "Config",
            Error::Csv(_) => "Csv",
            Error::Io(_) => "Io",
        }
    }
}
