use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::MetricError;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    pub tn: usize,
}

impl ConfusionCounts {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.fn_ + self.tn
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Zero denominators give 0.
pub fn precision_recall_f1(c: &ConfusionCounts) -> Prf {
    let precision = ratio(c.tp, c.tp + c.fp);
    let recall = ratio(c.tp, c.tp + c.fn_);
    let f1 = if precision + recall == 0.0 { 0.0 } else { 2.0 * precision * recall / (precision + recall) };
    Prf { precision, recall, f1 }
}

pub fn binary_counts(predicted: &[bool], gold: &[bool]) -> Result<ConfusionCounts, MetricError> {
    if predicted.len() != gold.len() {
        return Err(MetricError::LengthMismatch(predicted.len(), gold.len()));
    }
    let mut c = ConfusionCounts::default();
    for (&p, &g) in predicted.iter().zip(gold) {
        match (p, g) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, true) => c.fn_ += 1,
            (false, false) => c.tn += 1,
        }
    }
    Ok(c)
}

/// One-vs-rest counts for `class`.
pub fn class_counts(predicted: &[usize], gold: &[usize], class: usize) -> Result<ConfusionCounts, MetricError> {
    let p: Vec<bool> = predicted.iter().map(|&x| x == class).collect();
    let g: Vec<bool> = gold.iter().map(|&x| x == class).collect();
    binary_counts(&p, &g)
}

pub fn macro_average(scores: &[f64]) -> Result<f64, MetricError> {
    if scores.is_empty() {
        return Err(MetricError::EmptyInput);
    }
    Ok(scores.iter().sum::<f64>() / scores.len() as f64)
}

/// Per-class precision, recall and F1 averaged over the classes present in
/// `gold`.
pub fn macro_prf(predicted: &[usize], gold: &[usize]) -> Result<Prf, MetricError> {
    if predicted.len() != gold.len() {
        return Err(MetricError::LengthMismatch(predicted.len(), gold.len()));
    }
    let classes: BTreeSet<usize> = gold.iter().copied().collect();
    let mut per = Vec::with_capacity(classes.len());
    for &k in &classes {
        per.push(precision_recall_f1(&class_counts(predicted, gold, k)?));
    }
    Ok(Prf {
        precision: macro_average(&per.iter().map(|s| s.precision).collect::<Vec<_>>())?,
        recall: macro_average(&per.iter().map(|s| s.recall).collect::<Vec<_>>())?,
        f1: macro_average(&per.iter().map(|s| s.f1).collect::<Vec<_>>())?,
    })
}

/// Fraction of candidates equal to their reference after whitespace
/// normalisation by tokenization.
pub fn exact_match_accuracy<S: AsRef<str>, T: AsRef<str>>(candidates: &[S], references: &[T]) -> Result<f64, MetricError> {
    if candidates.len() != references.len() {
        return Err(MetricError::LengthMismatch(candidates.len(), references.len()));
    }
    if candidates.is_empty() {
        return Err(MetricError::EmptyInput);
    }
    let hits = candidates
        .iter()
        .zip(references)
        .filter(|(c, r)| fixline_lang::normalize(c.as_ref()) == fixline_lang::normalize(r.as_ref()))
        .count();
    Ok(hits as f64 / candidates.len() as f64)
}
