use std::path::PathBuf;

use thiserror::Error;

/// Process-level errors; each maps to a documented exit code.
#[derive(Debug, Error)]
pub enum AppError {
    /// Missing or malformed input files, inconsistent dataset contents.
    #[error("parse error: {0}")]
    Parse(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("training aborted: {0}")]
    TrainingAborted(String),
    #[error("gradient check failed: {0}")]
    GradCheck(String),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("internal error: {0}")]
    Internal(String),
}

impl AppError {
    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Parse(_) => 2,
            AppError::Config(_) => 3,
            AppError::TrainingAborted(_) => 4,
            AppError::GradCheck(_) => 5,
            AppError::Io { .. } | AppError::Internal(_) => 1,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        AppError::Io { path: path.into(), source }
    }
}

impl From<topoclasp_core::Error> for AppError {
    fn from(e: topoclasp_core::Error) -> Self {
        use topoclasp_core::Error as E;
        match e {
            E::Integrity(m) => AppError::Parse(m),
            E::Config(m) => AppError::Config(m),
            E::TrainingAborted(m) => AppError::TrainingAborted(m),
            E::Contract(m) => AppError::Internal(m),
        }
    }
}

pub type Result<T> = std::result::Result<T, AppError>;
