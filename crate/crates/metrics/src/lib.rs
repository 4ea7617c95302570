//! Evaluation measures for defect identification, classification and repair.

mod auc;
mod bleu;
mod classification;

pub use auc::{auc_binary, auc_multiclass, AucMode};
pub use bleu::{bleu, corpus_bleu, mean_sentence_bleu, BleuConfig};
pub use classification::{
    binary_counts, class_counts, exact_match_accuracy, macro_average, macro_prf, precision_recall_f1, ConfusionCounts, Prf,
};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricError {
    #[error("metric needs at least one sample")]
    EmptyInput,
    #[error("only one class present; AUC is undefined")]
    SingleClass,
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("invalid BLEU configuration: {0}")]
    BleuConfig(String),
}
