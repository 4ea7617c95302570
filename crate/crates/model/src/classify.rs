use fixline_lang::DefectLabel;
use fixline_tensor::{Graph, TensorError, Var};

use crate::layers::linear;
use crate::model::{Linear, NtnWeights};

/// Per-slice bilinear scores `h_buggy^T G_k h_clean + b_k`, before the ReLU.
pub fn ntn_preactivation(g: &mut Graph<'_>, ntn: &NtnWeights, h_clean: Var, h_buggy: Var) -> Result<Var, TensorError> {
    let d = g.value(h_clean).cols();
    let slices = g.store().get(ntn.bias).len();
    let gamma = g.param(ntn.gamma);
    let bias = g.param(ntn.bias);
    let u = g.matmul(h_buggy, gamma)?;
    let u = g.reshape(u, &[slices, d])?;
    let s = g.matmul_nt(u, h_clean)?;
    let s = g.reshape(s, &[1, slices])?;
    g.add_row(s, bias)
}

pub fn ntn_relate(g: &mut Graph<'_>, ntn: &NtnWeights, h_clean: Var, h_buggy: Var) -> Result<Var, TensorError> {
    let s = ntn_preactivation(g, ntn, h_clean, h_buggy)?;
    g.relu(s)
}

#[derive(Debug, Clone, Copy)]
pub struct ClassifierVars {
    pub ntn: Var,
    /// `e = tanh(W_e h_change + b_e)`.
    pub fused: Var,
    pub logits: Var,
    pub probs: Var,
}

/// Relation features, fused vector and label distribution for one pair of
/// `[1, d]` summaries.
pub fn classify_change(
    g: &mut Graph<'_>,
    ntn: &NtnWeights,
    fuse: &Linear,
    out: &Linear,
    h_clean: Var,
    h_buggy: Var,
) -> Result<ClassifierVars, TensorError> {
    let rel = ntn_relate(g, ntn, h_clean, h_buggy)?;
    let change = g.concat_cols(&[rel, h_buggy, h_clean])?;
    let e = linear(g, change, fuse)?;
    let fused = g.tanh(e)?;
    let logits = linear(g, fused, out)?;
    let probs = g.softmax(logits)?;
    Ok(ClassifierVars { ntn: rel, fused, logits, probs })
}

/// Index of the largest entry; ties go to the lowest index.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

pub fn predict_label(probs: &[f64]) -> DefectLabel {
    DefectLabel::from_id(argmax(probs)).expect("distribution over the label set")
}

/// The `k` most probable labels, ties by lowest id.
pub fn top_k(probs: &[f64], k: usize) -> Vec<(DefectLabel, f64)> {
    let mut idx: Vec<usize> = (0..probs.len()).collect();
    idx.sort_by(|&a, &b| probs[b].total_cmp(&probs[a]).then(a.cmp(&b)));
    idx.into_iter().take(k).map(|i| (DefectLabel::from_id(i).expect("label id"), probs[i])).collect()
}
