use thiserror::Error;

/// Errors produced by the qamem engines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("pattern set is empty")]
    EmptyPatternSet,

    #[error("{n} qubits exceeds the configured maximum of {max} (dense operator would need {bytes} bytes)")]
    TooManyQubits { n: usize, max: usize, bytes: u128 },

    #[error("operator is not Hermitian (max |H - H^dagger| = {0:e})")]
    NotHermitian(f64),

    #[error("eigendecomposition failed: {0}")]
    Eigen(String),

    #[error("singular r-equation denominator |1 - 2Jt x| = {0:e}")]
    SingularDenominator(f64),

    #[error("no fixed point found: {0}")]
    NoConvergence(String),

    #[error("phase pair {0} does not occur in the diagram")]
    BoundaryAbsent(String),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
