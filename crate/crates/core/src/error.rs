use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("infeasible privacy budget: {0}")]
    InfeasibleBudget(String),

    #[error("calibration did not converge: {0}")]
    NonConvergence(String),

    #[error("malformed count tree: {0}")]
    MalformedTree(String),

    #[error("schema error: {0}")]
    Schema(String),

    #[error("data error: {0}")]
    Data(String),

    #[error("model format error: {0}")]
    ModelFormat(String),

    #[error("model checksum mismatch (expected {expected}, found {found})")]
    Checksum { expected: String, found: String },

    #[error("unsupported model version {0}")]
    Version(u32),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
