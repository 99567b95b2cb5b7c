use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("grid too narrow: {reason} (need span >= {required:.6} eV, have {actual:.6} eV)")]
    GridTooNarrow {
        reason: String,
        required: f64,
        actual: f64,
    },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("a.c. peak not found near tau = {tau} fs: {reason}")]
    AcPeakNotFound { tau: f64, reason: String },

    #[error("reconstruction failed: {0}")]
    Reconstruction(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
