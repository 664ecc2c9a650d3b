use std::path::PathBuf;

use policy_overlap::Error as CoreError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{path}: not found\n  hint: {hint}")]
    MissingArtifact { path: PathBuf, hint: String },

    #[error("{path}: changed since `{producer}` wrote it\n  hint: {hint}")]
    StaleArtifact {
        path: PathBuf,
        producer: String,
        hint: String,
    },

    #[error("{context}: {source}")]
    Input {
        context: String,
        #[source]
        source: CoreError,
    },

    #[error("{0}")]
    Analysis(CoreError),
}

impl CliError {
    /// 1 for analysis-level failures, 2 for usage and input failures.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Analysis(_) => 1,
            _ => 2,
        }
    }

    pub(crate) fn input(context: impl std::fmt::Display) -> impl FnOnce(CoreError) -> CliError {
        let context = context.to_string();
        move |source| CliError::Input { context, source }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Analysis(_)
            | CoreError::Fit(_)
            | CoreError::Training(_)
            | CoreError::EmptyPair(..)
            | CoreError::Empty(_) => CliError::Analysis(e),
            other => CliError::Input {
                context: "input".into(),
                source: other,
            },
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
