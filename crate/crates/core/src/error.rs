use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("N = {0} is not prime")]
    NotPrime(usize),
    #[error("N = {n} is below the minimum of {min}")]
    DimensionTooSmall { n: usize, min: usize },
    #[error("vector must have at least one entry")]
    EmptyVector,
    #[error("vector contains a non-finite entry at index {0}")]
    NonFinite(usize),
    #[error("probe must have unit norm, got {0}")]
    NonUnitProbe(f64),
    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("shift index {index} out of range for N = {n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("dense computation needs N <= {limit}, got N = {n}")]
    TooLargeForDense { n: usize, limit: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("sparsity K = {k} out of range 0..={max}")]
    SparsityOutOfRange { k: usize, max: usize },
    #[error("duplicate target at cell (delay {delay}, doppler {doppler})")]
    DuplicateTarget { delay: usize, doppler: usize },
    #[error("cannot add noise at finite SNR to an all-zero signal")]
    ZeroSignal,
    #[error("enumeration of {0} supports exceeds the budget")]
    EnumerationBudget(u128),
    #[error("footprint centre is a zero cell")]
    ZeroCenter,
    #[error("scene JSON: {0}")]
    SceneFormat(String),
}

pub type Result<T> = std::result::Result<T, Error>;
