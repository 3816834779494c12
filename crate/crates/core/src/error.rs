use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid layout: {0}")]
    InvalidLayout(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not Hermitian (max |M - M^dagger| entry {0:e})")]
    NotHermitian(f64),

    #[error("trace is {0}, expected 1")]
    InvalidTrace(f64),

    #[error("not positive semidefinite (min eigenvalue {0:e})")]
    NotPsd(f64),

    #[error("invalid subsystem selection: {0}")]
    InvalidSubsystems(String),

    #[error("invalid POVM: {0}")]
    InvalidPovm(String),

    #[error("channel is not trace preserving (max |sum K^dagger K - I| entry {0:e})")]
    NotTracePreserving(f64),

    #[error("invalid probability distribution: {0}")]
    InvalidDistribution(String),

    #[error("parameter vector has length {found}, expected {expected}")]
    ParamLength { expected: usize, found: usize },

    #[error("basis is not orthonormal (max |B^dagger B - I| entry {0:e})")]
    NotOrthonormal(f64),

    #[error("broadcast condition violated (marginal residuals {0:e}, {1:e})")]
    NotBroadcast(f64, f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("optimizer failed: {0}")]
    Optimizer(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Coarse classification used by the command-line exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Parse,
    Invariant,
    Optimizer,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Parse(_) | Error::Io(_) => ErrorClass::Parse,
            Error::Optimizer(_) => ErrorClass::Optimizer,
            _ => ErrorClass::Invariant,
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
