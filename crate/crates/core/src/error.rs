use alloc::string::String;

/// Errors raised by the analysis routines.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix {0} has non-finite entries")]
    NonFinite(&'static str),
    #[error("matrix {name} is not Hermitian (defect {defect:e})")]
    NotHermitian { name: &'static str, defect: f64 },
    #[error("matrix {name} is not skew-Hermitian (defect {defect:e})")]
    NotSkewHermitian { name: &'static str, defect: f64 },
    #[error("matrix {name} is not positive semi-definite (min eigenvalue {min_eig:e})")]
    NotPsd { name: &'static str, min_eig: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("singular matrix: {0}")]
    Singular(&'static str),
    #[error("eigenvalue solver did not converge")]
    EigenFailure,
    #[error("iteration did not terminate within {0} steps")]
    NoTermination(usize),
    #[error("staircase has an inconsistent block of size {0}; DAE index exceeds 2")]
    IndexTooHigh(usize),
    #[error("system has trivial dynamics")]
    TrivialDynamics,
    #[error("no decay signal on the time grid")]
    NoDecaySignal,
    #[error("initial data inconsistent (projection correction {correction:e})")]
    InconsistentInitialData { correction: f64 },
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("certification failed: {0}")]
    CertificationFailed(String),
}

pub type Result<T> = core::result::Result<T, Error>;
