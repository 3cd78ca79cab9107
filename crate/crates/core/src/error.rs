use thiserror::Error;

/// Errors produced anywhere in the toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("quadrature did not converge: estimate {estimate:e}, error {error:e} after {subdivisions} subdivisions")]
    NonConvergence {
        estimate: f64,
        error: f64,
        subdivisions: usize,
    },

    #[error("root finder did not converge after {iterations} iterations (last x = {last:e})")]
    RootNonConvergence { iterations: usize, last: f64 },

    #[error("invalid bracket: f({lo:e}) = {f_lo:e} and f({hi:e}) = {f_hi:e} have the same sign")]
    InvalidBracket { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },

    #[error("moment generating function argument {arg:e} outside its domain ({lower:e}, {upper:e})")]
    MgfDomain { arg: f64, lower: f64, upper: f64 },

    #[error("degenerate sample: {0}")]
    DegenerateSample(String),

    #[error("insufficient data: need at least {needed} observations, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("optimization failed: {0}")]
    OptimizationFailed(String),

    #[error("invalid nesting: {0}")]
    InvalidNesting(String),

    #[error("no risk-neutral solution: {0}")]
    NoSolution(String),

    #[error("insufficient quotes: need at least {needed}, got {got}")]
    InsufficientQuotes { needed: usize, got: usize },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("non-positive price {value} at line {line}")]
    NonPositivePrice { line: usize, value: f64 },

    #[error("dates not strictly increasing at line {line}")]
    NonMonotoneDates { line: usize },

    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Stable machine-readable identifier for the error variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParameter(_) => "InvalidParameter",
            Error::NonConvergence { .. } => "NonConvergence",
            Error::RootNonConvergence { .. } => "NonConvergence",
            Error::InvalidBracket { .. } => "InvalidBracket",
            Error::MgfDomain { .. } => "MgfDomain",
            Error::DegenerateSample(_) => "DegenerateSample",
            Error::InsufficientData { .. } => "InsufficientData",
            Error::OptimizationFailed(_) => "OptimizationFailed",
            Error::InvalidNesting(_) => "InvalidNesting",
            Error::NoSolution(_) => "NoSolution",
            Error::InsufficientQuotes { .. } => "InsufficientQuotes",
            Error::Parse { .. } => "ParseError",
            Error::NonPositivePrice { .. } => "NonPositivePrice",
            Error::NonMonotoneDates { .. } => "NonMonotoneDates",
            Error::InvalidGrid(_) => "InvalidGrid",
            Error::Io(_) => "Io",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn ensure_positive(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "{name} must be finite and > 0, got {value}"
        )))
    }
}

pub(crate) fn ensure_finite(name: &str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "{name} must be finite, got {value}"
        )))
    }
}
