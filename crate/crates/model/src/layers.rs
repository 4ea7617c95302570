//! Graph building blocks shared by the encoder and decoder.

use fixline_tensor::{AttnMask, Graph, TensorError, Var};

use crate::model::{AttentionWeights, FeedForward, Linear, Norm};

pub fn linear(g: &mut Graph<'_>, x: Var, l: &Linear) -> Result<Var, TensorError> {
    let w = g.param(l.w);
    let y = g.matmul(x, w)?;
    match l.b {
        Some(b) => {
            let b = g.param(b);
            g.add_row(y, b)
        }
        None => Ok(y),
    }
}

pub fn norm(g: &mut Graph<'_>, x: Var, n: &Norm) -> Result<Var, TensorError> {
    let gamma = g.param(n.gamma);
    let beta = g.param(n.beta);
    g.layer_norm(x, gamma, beta)
}

/// Output of one multi-head attention block. `weights` is the attention op
/// node, whose probabilities can be inspected.
pub struct AttentionOut {
    pub weights: Var,
    pub output: Var,
}

pub fn multi_head(
    g: &mut Graph<'_>,
    w: &AttentionWeights,
    queries: Var,
    memory: Var,
    heads: usize,
    mask: &AttnMask,
) -> Result<AttentionOut, TensorError> {
    let q = linear(g, queries, &w.q)?;
    let k = linear(g, memory, &w.k)?;
    let v = linear(g, memory, &w.v)?;
    let weights = g.attention(q, k, v, heads, mask)?;
    let output = linear(g, weights, &w.o)?;
    Ok(AttentionOut { weights, output })
}

pub fn feed_forward(g: &mut Graph<'_>, f: &FeedForward, x: Var) -> Result<Var, TensorError> {
    let h = linear(g, x, &f.inner)?;
    let h = g.relu(h)?;
    linear(g, h, &f.outer)
}

/// `norm(x + dropout(sub))`.
pub fn residual(g: &mut Graph<'_>, x: Var, sub: Var, n: &Norm, dropout: f64) -> Result<Var, TensorError> {
    let sub = g.dropout(sub, dropout)?;
    let s = g.add(x, sub)?;
    norm(g, s, n)
}
