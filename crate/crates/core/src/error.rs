use alloc::string::String;

/// Errors raised by the core library.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// Input data violates a structural invariant (bad node ids, bad labels).
    #[error("integrity error: {0}")]
    Integrity(String),
    /// A caller broke an operation's precondition (shape mismatch, asymmetry).
    #[error("contract violation: {0}")]
    Contract(String),
    /// Invalid configuration value.
    #[error("config error: {0}")]
    Config(String),
    /// Training produced a non-finite loss or otherwise had to stop.
    #[error("training aborted: {0}")]
    TrainingAborted(String),
}

pub type Result<T> = core::result::Result<T, Error>;
