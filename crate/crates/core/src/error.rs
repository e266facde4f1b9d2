use thiserror::Error;

pub type Result<T> = std::result::Result<T, SannError>;

#[derive(Debug, Error)]
pub enum SannError {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("invalid range: {0}")]
    Range(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("stale forward trace: trace stamped at version {trace}, network is at version {network}")]
    StaleTrace { trace: u64, network: u64 },

    #[error("training diverged: {0}")]
    Divergence(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
