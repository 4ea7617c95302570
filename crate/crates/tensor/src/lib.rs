//! Dense `f64` tensors, a tape-based autodiff graph, Adam, finite-difference
//! gradient checking and the checkpoint container.

pub mod checkpoint;
mod error;
pub mod gradcheck;
pub mod graph;
pub mod kernels;
pub mod optim;
mod params;
mod tensor;

pub use checkpoint::{Checkpoint, Dtype};
pub use error::{CheckpointError, TensorError};
pub use gradcheck::{grad_check, rel_error, GradCheckOptions, GradCheckReport};
pub use graph::{AttnMask, Graph, OpKind, Var};
pub use optim::{adam_step, warmup_lr, AdamConfig, AdamState};
pub use params::{init_rng, Gradients, Init, ParamId, ParamStore, DEFAULT_INIT_RANGE};
pub use tensor::Tensor;
