use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("schema error: missing required column `{column}`")]
    MissingColumn { column: String },

    #[error("line {line}: {message}")]
    Row { line: u64, message: String },

    #[error("malformed {what}: {message}")]
    Format { what: &'static str, message: String },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("fit error: {0}")]
    Fit(String),

    #[error("invalid training data: {0}")]
    Training(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("label {label} outside label space of size {size}")]
    LabelOutOfSpace { label: usize, size: usize },

    #[error("expected a {expected} file, found `{found}`")]
    WrongMagic { expected: &'static str, found: String },

    #[error("unsupported format_version {found} (this build reads {supported})")]
    VersionMismatch { found: u32, supported: u32 },

    #[error("empty input: {0}")]
    Empty(String),

    #[error("no examples for pair ({0}, {1})")]
    EmptyPair(usize, usize),

    #[error("distribution is not normalized (sums to {0})")]
    Unnormalized(f64),

    #[error("invalid config: {0}")]
    Config(String),

    #[error("analysis failed: {0}")]
    Analysis(String),

    #[error("{0}")]
    Invalid(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
