use thiserror::Error;

pub type Result<T> = std::result::Result<T, DmgError>;

#[derive(Debug, Error)]
pub enum DmgError {
    #[error("shape mismatch: {op} got {lhs:?} and {rhs:?}")]
    ShapeMismatch {
        op: &'static str,
        lhs: Vec<usize>,
        rhs: Vec<usize>,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite gradient for parameter {0}")]
    NonFiniteGradient(String),

    #[error("corpus error: {0}")]
    Corpus(String),

    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl DmgError {
    pub fn invalid(msg: impl Into<String>) -> Self {
        DmgError::InvalidArgument(msg.into())
    }
}
