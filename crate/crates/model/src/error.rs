use fixline_lang::ParseError;
use fixline_tensor::{CheckpointError, TensorError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error("syntax error: {0}")]
    Syntax(#[from] ParseError),
    #[error("target of {len} tokens exceeds the decode limit {max}")]
    TargetTooLong { len: usize, max: usize },
    #[error("decoder prefix of {len} tokens exceeds the decode limit {max}")]
    PrefixTooLong { len: usize, max: usize },
    #[error("{0} split is empty")]
    EmptySplit(&'static str),
    #[error("non-finite loss at epoch {epoch}, batch {batch}: {detail}")]
    NonFiniteLoss { epoch: usize, batch: usize, detail: String },
    #[error("split ratios must be non-negative and sum to 1, got {0:?}")]
    RatioError(Vec<f64>),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Checkpoint(#[from] CheckpointError),
    #[error(transparent)]
    Metric(#[from] fixline_metrics::MetricError),
}
