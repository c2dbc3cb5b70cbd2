use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("domain is too small: {0}")]
    DomainTooSmall(String),
    #[error("walk exceeded the step cap of {cap} steps")]
    StepCapExceeded { cap: u64 },
    #[error("root is unreachable from vertex {0}")]
    UnreachableRoot(usize),
    #[error("linear solver failed: {0}")]
    Solver(String),
    #[error("tree is not a valid spanning tree for this configuration: {0}")]
    InvalidTree(String),
    #[error("path is not a valid Peano path for this configuration: {0}")]
    InvalidPath(String),
    #[error("curve leaked across the boundary at point {index}")]
    Leakage { index: usize },
    #[error("enumeration limit of {0} exceeded")]
    EnumerationLimit(u64),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}
