//! Joint defect classifier and repair generator.
//!
//! Two versions of a function are encoded independently by a transformer
//! whose attention is restricted by the data-flow graph. A bilinear
//! relation layer compares their [CLS] states and a small head predicts the
//! defect label; a transformer decoder attends over the fused relation
//! vector and the current version's states to generate the repaired
//! function.

pub mod beam;
pub mod classify;
pub mod config;
pub mod decoder;
pub mod encoder;
mod error;
pub mod input;
pub mod layers;
pub mod model;
pub mod predict;
pub mod train;
pub mod vocab;

pub use beam::{beam_search, greedy, Hypothesis, StepModel};
pub use config::ModelConfig;
pub use error::ModelError;
pub use input::{build_input, prepare, EncoderInput, PreparedFunction, Segment};
pub use model::Model;
pub use predict::{analyze, Analysis, Patch};
pub use train::{stratified_split, train_model, DatasetSplit, EpochRecord, TrainConfig, TrainOutcome};
pub use vocab::Vocabulary;
