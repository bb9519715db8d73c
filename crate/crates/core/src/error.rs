use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum WsError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("capacity error: {0}")]
    Capacity(String),
    #[error("contract error: {0}")]
    Contract(String),
    #[error("geometry error: {0}")]
    Geometry(String),
    #[error("solver error: {msg} (residual {residual:e})")]
    Solver { msg: String, residual: f64 },
    #[error("quality gate failed: {0}")]
    Quality(String),
    #[error("accuracy error: {0}")]
    Accuracy(String),
    #[error("parse error at {location}: {msg}")]
    Parse { location: String, msg: String },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, WsError>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(WsError::Domain(msg.into()))
}
