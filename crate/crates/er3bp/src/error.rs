use std::path::PathBuf;

use er3bp_core::Error as CoreError;

/// Process exit status for each class of failure.
pub mod exit {
    pub const SUCCESS: u8 = 0;
    pub const IO: u8 = 1;
    pub const VALIDATION: u8 = 2;
    pub const NON_CONVERGENCE: u8 = 3;
    pub const INTEGRATION: u8 = 4;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("{0}")]
    Validation(String),
    #[error("refinement did not converge: {0}")]
    NotConverged(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("malformed CSV row {row}: {message}")]
    CsvShape { row: usize, message: String },
}

impl CliError {
    pub fn validation(message: impl Into<String>) -> Self {
        CliError::Validation(message.into())
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) => match e {
                CoreError::NoSignChange { .. }
                | CoreError::NoConvergence { .. }
                | CoreError::EventNotFound { .. }
                | CoreError::DegenerateDenominator(_)
                | CoreError::DegenerateNormalization(_) => exit::NON_CONVERGENCE,
                CoreError::Collision { .. } | CoreError::StepSizeUnderflow { .. } | CoreError::MaxStepsExceeded { .. } => {
                    exit::INTEGRATION
                }
                _ => exit::VALIDATION,
            },
            CliError::Validation(_) | CliError::Json { .. } | CliError::CsvShape { .. } => exit::VALIDATION,
            CliError::NotConverged(_) => exit::NON_CONVERGENCE,
            CliError::Io { .. } | CliError::Csv(_) => exit::IO,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub(crate) fn io_at(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> CliError {
    let path = path.into();
    move |source| CliError::Io { path, source }
}
