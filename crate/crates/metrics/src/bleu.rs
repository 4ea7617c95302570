use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::MetricError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BleuConfig {
    pub max_gram: usize,
    pub weights: Vec<f64>,
    /// Add-one smoothing of the n-gram precisions for n >= 2.
    pub smoothing: bool,
}

impl Default for BleuConfig {
    fn default() -> Self {
        Self { max_gram: 4, weights: vec![0.25; 4], smoothing: false }
    }
}

impl BleuConfig {
    fn validate(&self) -> Result<(), MetricError> {
        if self.max_gram == 0 || self.weights.len() != self.max_gram {
            return Err(MetricError::BleuConfig(format!("{} weights for max_gram {}", self.weights.len(), self.max_gram)));
        }
        if self.weights.iter().any(|w| *w <= 0.0) || (self.weights.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(MetricError::BleuConfig("weights must be positive and sum to 1".into()));
        }
        Ok(())
    }
}

fn ngram_counts<S: AsRef<str>>(tokens: &[S], n: usize) -> HashMap<Vec<&str>, usize> {
    let mut counts = HashMap::new();
    if tokens.len() >= n {
        for w in tokens.windows(n) {
            *counts.entry(w.iter().map(|t| t.as_ref()).collect()).or_insert(0) += 1;
        }
    }
    counts
}

/// Clipped matches and total candidate n-grams for each order.
fn clipped<S: AsRef<str>, T: AsRef<str>>(cand: &[S], reference: &[T], max_gram: usize) -> Vec<(usize, usize)> {
    (1..=max_gram)
        .map(|n| {
            let c = ngram_counts(cand, n);
            let r = ngram_counts(reference, n);
            let matched = c.iter().map(|(g, k)| (*k).min(r.get(g).copied().unwrap_or(0))).sum();
            (matched, cand.len().saturating_sub(n - 1))
        })
        .collect()
}

fn combine(stats: &[(usize, usize)], c: usize, r: usize, cfg: &BleuConfig) -> f64 {
    let mut log_sum = 0.0;
    for (i, (&(m, t), w)) in stats.iter().zip(&cfg.weights).enumerate() {
        let (m, t) = if cfg.smoothing && i > 0 { (m as f64 + 1.0, t as f64 + 1.0) } else { (m as f64, t as f64) };
        if m == 0.0 || t == 0.0 {
            return 0.0;
        }
        log_sum += w * (m / t).ln();
    }
    let bp = if c > r { 1.0 } else { (1.0 - r as f64 / c as f64).exp() };
    bp * log_sum.exp()
}

/// Sentence BLEU against one reference.
pub fn bleu<S: AsRef<str>, T: AsRef<str>>(candidate: &[S], reference: &[T], cfg: &BleuConfig) -> Result<f64, MetricError> {
    cfg.validate()?;
    if candidate.is_empty() || reference.is_empty() {
        return Err(MetricError::EmptyInput);
    }
    Ok(combine(&clipped(candidate, reference, cfg.max_gram), candidate.len(), reference.len(), cfg))
}

/// Arithmetic mean of sentence BLEU.
pub fn mean_sentence_bleu<S: AsRef<str>, T: AsRef<str>>(
    candidates: &[Vec<S>],
    references: &[Vec<T>],
    cfg: &BleuConfig,
) -> Result<f64, MetricError> {
    if candidates.len() != references.len() {
        return Err(MetricError::LengthMismatch(candidates.len(), references.len()));
    }
    if candidates.is_empty() {
        return Err(MetricError::EmptyInput);
    }
    let mut sum = 0.0;
    for (c, r) in candidates.iter().zip(references) {
        sum += bleu(c, r, cfg)?;
    }
    Ok(sum / candidates.len() as f64)
}

/// Corpus BLEU: clipped counts and lengths pooled over all pairs.
pub fn corpus_bleu<S: AsRef<str>, T: AsRef<str>>(
    candidates: &[Vec<S>],
    references: &[Vec<T>],
    cfg: &BleuConfig,
) -> Result<f64, MetricError> {
    cfg.validate()?;
    if candidates.len() != references.len() {
        return Err(MetricError::LengthMismatch(candidates.len(), references.len()));
    }
    if candidates.is_empty() || candidates.iter().any(|c| c.is_empty()) || references.iter().any(|r| r.is_empty()) {
        return Err(MetricError::EmptyInput);
    }
    let mut stats = vec![(0, 0); cfg.max_gram];
    let (mut c, mut r) = (0, 0);
    for (cand, reference) in candidates.iter().zip(references) {
        for (acc, s) in stats.iter_mut().zip(clipped(cand, reference, cfg.max_gram)) {
            acc.0 += s.0;
            acc.1 += s.1;
        }
        c += cand.len();
        r += reference.len();
    }
    Ok(combine(&stats, c, r, cfg))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<&str> {
        s.split(' ').collect()
    }

    #[test]
    fn worked_examples() {
        let cfg = BleuConfig::default();
        assert_eq!(bleu(&toks("a b c d e"), &toks("a b c d e"), &cfg).unwrap(), 1.0);
        assert_eq!(bleu(&toks("a b c d"), &toks("a b c e"), &cfg).unwrap(), 0.0);
        let short = bleu(&toks("a b c d e"), &toks("a b c d e f g h"), &cfg).unwrap();
        assert!((short - (1.0f64 - 8.0 / 5.0).exp()).abs() < 1e-12);
    }

    #[test]
    fn smoothing_rescues_missing_higher_orders() {
        let cfg = BleuConfig { smoothing: true, ..BleuConfig::default() };
        let s = bleu(&toks("a b c d"), &toks("a b c e"), &cfg).unwrap();
        let expected = (0.25 * ((3.0f64 / 4.0).ln() + (3.0f64 / 4.0).ln() + (2.0f64 / 3.0).ln() + (1.0f64 / 2.0).ln())).exp();
        assert!((s - expected).abs() < 1e-12);
    }

    #[test]
    fn errors() {
        let cfg = BleuConfig::default();
        assert_eq!(bleu::<&str, &str>(&[], &["a"], &cfg), Err(MetricError::EmptyInput));
        let bad = BleuConfig { max_gram: 2, weights: vec![0.3, 0.3], smoothing: false };
        assert!(matches!(bleu(&["a"], &["a"], &bad), Err(MetricError::BleuConfig(_))));
    }

    #[test]
    fn corpus_pools_counts() {
        let cfg = BleuConfig::default();
        let c = vec![toks("a b c d"), toks("a b c d e")];
        let r = vec![toks("a b c e"), toks("a b c d e")];
        let s = corpus_bleu(&c, &r, &cfg).unwrap();
        let expected = (0.25 * ((8.0f64 / 9.0).ln() + (6.0f64 / 7.0).ln() + (4.0f64 / 5.0).ln() + (2.0f64 / 3.0).ln())).exp();
        assert!((s - expected).abs() < 1e-12);
        assert_eq!(mean_sentence_bleu(&c, &r, &cfg).unwrap(), 0.5);
    }
}
