use fixline_model::ModelError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MiningError {
    #[error("repository error: {0}")]
    Repository(#[from] git2::Error),
    #[error("malformed diff at line {line}: {reason}")]
    MalformedDiff { line: usize, reason: String },
    #[error("invalid triple: {0}")]
    InvalidTriple(String),
    #[error("manifest: {0}")]
    Manifest(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Model(#[from] ModelError),
}
