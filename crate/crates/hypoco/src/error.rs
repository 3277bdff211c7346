use hypoco_core::Error as CoreError;

/// CLI failures, each mapped to a process exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Certification(String),
    #[error("{0}")]
    Invariant(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 1,
            CliError::Certification(_) => 2,
            CliError::Invariant(_) => 3,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        let msg = e.to_string();
        match e {
            CoreError::NotSquare { .. }
            | CoreError::DimensionMismatch(_)
            | CoreError::NonFinite(_)
            | CoreError::NotHermitian { .. }
            | CoreError::NotSkewHermitian { .. }
            | CoreError::NotPsd { .. }
            | CoreError::InvalidArgument(_)
            | CoreError::InconsistentInitialData { .. } => CliError::Input(msg),
            CoreError::CertificationFailed(_)
            | CoreError::NoTermination(_)
            | CoreError::IndexTooHigh(_)
            | CoreError::TrivialDynamics
            | CoreError::NoDecaySignal => CliError::Certification(msg),
            CoreError::Singular(_) | CoreError::EigenFailure | CoreError::Invariant(_) => CliError::Invariant(msg),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Input(format!("io: {e}"))
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Input(format!("json: {e}"))
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Input(format!("csv: {e}"))
    }
}

pub type CliResult<T> = Result<T, CliError>;
