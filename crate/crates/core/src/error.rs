use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("solver did not converge: {0}")]
    NoConvergence(String),
    #[error("packing failed certification: {0}")]
    Uncertified(String),
    #[error("region is not admissible: {0}")]
    BadRegion(String),
    #[error("singular matrix: {0}")]
    Singular(String),
    #[error("matching error: {0}")]
    BadMatching(String),
    #[error("schema error: {0}")]
    Schema(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
