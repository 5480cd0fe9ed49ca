use std::path::PathBuf;

use kasner_core::bianchi::WHState;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Scenario JSON that does not match the schema; `path` is the offending field.
    #[error("scenario error at `{path}`: {message}")]
    Schema { path: String, message: String },

    #[error("invalid scenario: {0}")]
    Invalid(String),

    #[error("unknown fixture `{0}` (see `kasner-lab fixtures`)")]
    UnknownFixture(String),

    #[error("integration failed: {source}")]
    Integration {
        #[source]
        source: kasner_core::Error,
        last: Option<Box<WHState>>,
    },

    #[error(transparent)]
    Core(#[from] kasner_core::Error),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl CliError {
    /// Process exit code: 2 for bad input, 1 for failures while running.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Schema { .. } | CliError::Invalid(_) | CliError::UnknownFixture(_) => 2,
            _ => 1,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
