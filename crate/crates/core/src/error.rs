use thiserror::Error;

use crate::copula::CopulaFamily;

/// Errors produced anywhere in the toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("Hurst parameter must lie in (0, 1), got {0}")]
    InvalidHurst(f64),

    #[error("length must be at least 1")]
    EmptySeries,

    #[error("non-finite value at index {0}")]
    NonFinite(usize),

    #[error("Cholesky factorization failed at pivot {index} (value {pivot:e})")]
    Factorization { index: usize, pivot: f64 },

    #[error("circulant embedding has negative eigenvalue {value:e} at index {index}")]
    NegativeEigenvalue { index: usize, value: f64 },

    #[error("period must be at least 1")]
    InvalidPeriod,

    #[error("series length {n} is not divisible by period {period}")]
    NotDivisible { n: usize, period: usize },

    #[error("ragged phase partition: phase {phase} has {len} elements, expected {expected}")]
    RaggedPartition { phase: usize, len: usize, expected: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("sample too small: need at least {min}, got {got}")]
    SampleTooSmall { min: usize, got: usize },

    #[error("Kendall tau undefined: all values tied on the {0} margin")]
    AllTied(&'static str),

    #[error("invalid parameters for {family:?} copula: {reason}")]
    InvalidParams { family: CopulaFamily, reason: String },

    #[error("tau {tau} outside the attainable range {range} of the {family:?} copula")]
    TauOutOfRange { family: CopulaFamily, tau: f64, range: &'static str },

    #[error("degenerate coherence window at ({p}, {q}): zero spectral energy")]
    DegenerateWindow { p: usize, q: usize },

    #[error("invalid frequency window: {0}")]
    InvalidWindow(String),

    #[error("all x values are equal; slope is undefined")]
    DegenerateX,

    #[error("{0} has zero variance")]
    ZeroVariance(&'static str),

    #[error("zero denominator in {0}")]
    ZeroDenominator(&'static str),

    #[error("{metric}: {source}")]
    Metric { metric: &'static str, source: Box<Error> },

    #[error("phase {phase}: {source}")]
    Phase { phase: usize, source: Box<Error> },

    #[error("root finding did not converge: {0}")]
    NoConvergence(String),

    #[error("data error: {0}")]
    Data(String),
}

impl Error {
    /// True when the failure stems from malformed or unsuitable input data,
    /// as opposed to a numerical breakdown.
    pub fn is_data_error(&self) -> bool {
        match self {
            Error::Factorization { .. }
            | Error::NegativeEigenvalue { .. }
            | Error::NoConvergence(_)
            | Error::DegenerateWindow { .. } => false,
            Error::Metric { source, .. } | Error::Phase { source, .. } => source.is_data_error(),
            _ => true,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
