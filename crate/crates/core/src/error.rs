use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("shape mismatch: expected {expected} values, got {got}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("grid mismatch between operands")]
    GridMismatch,
    #[error("non-finite value at index {0}")]
    NonFinite(usize),
    #[error("input is not Hermitian-symmetric (max defect {defect:.3e}, tolerance {tolerance:.1e})")]
    NotHermitian { defect: f64, tolerance: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("time {t} is at or past the blow-up time {blowup}")]
    PastBlowup { t: f64, blowup: f64 },
    #[error("fit rejected: {0}")]
    FitRejected(String),
    #[error("empty frequency set: {0}")]
    EmptySupport(String),
    #[error("zero denominator in ratio: {0}")]
    ZeroDenominator(String),
    #[error("non-finite state during integration at t = {0}")]
    NumericBreakdown(f64),
}

pub type Result<T> = std::result::Result<T, Error>;
