use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::MetricError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AucMode {
    /// Mean over ordered class pairs.
    Ovo,
    /// Mean over classes of class-vs-rest.
    Ovr,
}

/// Area under the ROC curve as the Mann-Whitney statistic: the probability
/// that a positive outscores a negative, ties counting one half.
pub fn auc_binary(scores: &[f64], labels: &[bool]) -> Result<f64, MetricError> {
    if scores.len() != labels.len() {
        return Err(MetricError::LengthMismatch(scores.len(), labels.len()));
    }
    let pos = labels.iter().filter(|&&l| l).count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(MetricError::SingleClass);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    // Sum of midranks of positives.
    let mut rank_sum = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        let mid = (i + j) as f64 / 2.0 + 1.0;
        rank_sum += mid * order[i..=j].iter().filter(|&&k| labels[k]).count() as f64;
        i = j + 1;
    }
    let (p, n) = (pos as f64, neg as f64);
    Ok((rank_sum - p * (p + 1.0) / 2.0) / (p * n))
}

/// Multiclass AUC from per-sample probability rows, averaged over the
/// classes present in `labels`.
pub fn auc_multiclass(probs: &[Vec<f64>], labels: &[usize], mode: AucMode) -> Result<f64, MetricError> {
    if probs.len() != labels.len() {
        return Err(MetricError::LengthMismatch(probs.len(), labels.len()));
    }
    let classes: Vec<usize> = labels.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
    if classes.len() < 2 {
        return Err(MetricError::SingleClass);
    }
    let mut total = 0.0;
    let mut count = 0usize;
    match mode {
        AucMode::Ovr => {
            for &k in &classes {
                let s: Vec<f64> = probs.iter().map(|p| p[k]).collect();
                let l: Vec<bool> = labels.iter().map(|&y| y == k).collect();
                total += auc_binary(&s, &l)?;
                count += 1;
            }
        }
        AucMode::Ovo => {
            for &j in &classes {
                for &k in &classes {
                    if j == k {
                        continue;
                    }
                    let idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == j || labels[i] == k).collect();
                    let s: Vec<f64> = idx.iter().map(|&i| probs[i][j]).collect();
                    let l: Vec<bool> = idx.iter().map(|&i| labels[i] == j).collect();
                    total += auc_binary(&s, &l)?;
                    count += 1;
                }
            }
        }
    }
    Ok(total / count as f64)
}
