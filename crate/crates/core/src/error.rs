use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("subordinator path reaches {reached} but the grid extends to {required}")]
    InsufficientPath { reached: f64, required: f64 },

    #[error("invariant violated: {0}")]
    InvariantViolation(String),

    #[error("{what} did not reach the requested accuracy: {detail}")]
    Accuracy { what: &'static str, detail: String },

    #[error("unsupported model: {0}")]
    UnsupportedModel(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("condition rejected: {condition}: {detail}")]
    ConditionRejected { condition: &'static str, detail: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
