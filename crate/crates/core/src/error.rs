use thiserror::Error;

/// Errors raised by the claimscope core library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("parse error at line {line}{}: {message}", .document.as_ref().map(|d| format!(" (document {d})")).unwrap_or_default())]
    Parse {
        line: usize,
        document: Option<String>,
        message: String,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("dimension mismatch: expected at most {expected} columns, got index {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("feature space fingerprint mismatch: model {model}, space {space}")]
    FingerprintMismatch { model: String, space: String },

    #[error("undefined correlation: {0}")]
    UndefinedCorrelation(String),

    #[error("design matrix is rank deficient; collinear columns: {}", .columns.join(", "))]
    RankDeficient { columns: Vec<String> },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
