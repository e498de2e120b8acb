use mechstate::Error as CoreError;
use thiserror::Error;

/// Pipeline failure, grouped by exit code.
#[derive(Debug, Error)]
pub enum RunError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) | RunError::Io { .. } => 2,
            RunError::Invariant(_) => 3,
            RunError::Numerical(_) => 4,
        }
    }

    /// Any library error met while validating input counts as a config error.
    pub fn from_config(e: CoreError) -> Self {
        RunError::Config(e.to_string())
    }

    pub fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        RunError::Io {
            path: path.display().to_string(),
            source,
        }
    }
}

impl From<CoreError> for RunError {
    fn from(e: CoreError) -> Self {
        let msg = e.to_string();
        match e {
            CoreError::InvalidParameter { .. } | CoreError::Unsupported(_) => RunError::Config(msg),
            CoreError::KernelInvariant(_)
            | CoreError::UnstablePlant(_)
            | CoreError::InvalidSpectrum(_)
            | CoreError::ZeroLikelihood { .. }
            | CoreError::LowAcceptance { .. } => RunError::Invariant(msg),
            CoreError::RootFinding { .. }
            | CoreError::Riccati(_)
            | CoreError::RealAxisRoot { .. }
            | CoreError::UnderResolved { .. }
            | CoreError::HorizonTooShort { .. }
            | CoreError::NonFinite { .. } => RunError::Numerical(msg),
        }
    }
}
