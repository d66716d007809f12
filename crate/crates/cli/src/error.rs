//! One error type for the whole binary, carrying the process exit code:
//! 1 for usage errors, 2 for data or format errors, 3 for numeric
//! failures during training or evaluation.

use notecnn_core::baseline::BaselineError;
use notecnn_core::cnn::CnnError;
use notecnn_core::cohort::CohortError;
use notecnn_core::explain::ExplainError;
use notecnn_core::metrics::MetricsError;
use notecnn_core::synth::SynthError;
use notecnn_core::textprep::TextError;
use std::path::Path;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Numeric(String),
}

pub type Result<T> = std::result::Result<T, CliError>;

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }

    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    pub fn data(msg: impl Into<String>) -> Self {
        CliError::Data(msg.into())
    }

    /// Annotates a file-level error with its path.
    pub fn in_file(path: &Path, msg: impl std::fmt::Display) -> Self {
        CliError::Data(format!("{}: {msg}", path.display()))
    }

    /// Annotates a parse error with its path and 1-based line number.
    pub fn at_line(path: &Path, line: usize, msg: impl std::fmt::Display) -> Self {
        CliError::Data(format!("{}:{line}: {msg}", path.display()))
    }
}

impl From<CohortError> for CliError {
    fn from(e: CohortError) -> Self {
        match e {
            CohortError::InvalidArgument(_) => CliError::Usage(e.to_string()),
            other => CliError::Data(other.to_string()),
        }
    }
}

impl From<TextError> for CliError {
    fn from(e: TextError) -> Self {
        match e {
            TextError::InvalidArgument(_) => CliError::Usage(e.to_string()),
            other => CliError::Data(other.to_string()),
        }
    }
}

impl From<CnnError> for CliError {
    fn from(e: CnnError) -> Self {
        match e {
            CnnError::InvalidArgument(_) => CliError::Usage(e.to_string()),
            CnnError::Dimension(_) => CliError::Data(e.to_string()),
            CnnError::NonFinite { .. } | CnnError::Diverged { .. } => {
                CliError::Numeric(e.to_string())
            }
        }
    }
}

impl From<BaselineError> for CliError {
    fn from(e: BaselineError) -> Self {
        match e {
            BaselineError::InvalidArgument(_) => CliError::Usage(e.to_string()),
            other => CliError::Data(other.to_string()),
        }
    }
}

impl From<MetricsError> for CliError {
    fn from(e: MetricsError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<ExplainError> for CliError {
    fn from(e: ExplainError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<SynthError> for CliError {
    fn from(e: SynthError) -> Self {
        CliError::Usage(e.to_string())
    }
}
