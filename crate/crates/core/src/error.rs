use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("vertex {vertex} out of range for graph with {n_vertices} vertices")]
    InvalidVertex { vertex: usize, n_vertices: usize },

    #[error("graph validation failed: {0}")]
    Validation(String),

    #[error("random regular generation failed after {retries} rejected pairings")]
    GenerationFailure { retries: usize },

    #[error("degenerate configuration: {0}")]
    Degenerate(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("requested {requested} exceeds the configured limit {limit}")]
    ResourceLimit { requested: u64, limit: u64 },

    #[error("linear solve did not converge: {0}")]
    Solver(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
