use std::sync::Arc;

use fixline_tensor::{AttnMask, Graph, TensorError, Var};

use crate::input::EncoderInput;
use crate::layers::{feed_forward, multi_head, norm, residual};
use crate::model::Model;

/// Final hidden states plus per-layer attention nodes.
#[derive(Debug, Clone)]
pub struct EncoderOutput {
    /// `len x d`: [CLS], code, [SEP], nodes.
    pub hidden: Var,
    pub n_code: usize,
    pub n_vars: usize,
    /// Attention op node of each layer (probabilities inspectable).
    pub attention: Vec<Var>,
    /// Output of each layer's attention block before the residual.
    pub attention_out: Vec<Var>,
}

impl EncoderOutput {
    pub fn len(&self) -> usize {
        self.n_code + 2 + self.n_vars
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn h_cls(&self, g: &mut Graph<'_>) -> Result<Var, TensorError> {
        g.rows(self.hidden, 0, 1)
    }

    pub fn h_code(&self, g: &mut Graph<'_>) -> Result<Var, TensorError> {
        g.rows(self.hidden, 1, 1 + self.n_code)
    }

    pub fn h_sep(&self, g: &mut Graph<'_>) -> Result<Var, TensorError> {
        g.rows(self.hidden, 1 + self.n_code, 2 + self.n_code)
    }

    pub fn h_vars(&self, g: &mut Graph<'_>) -> Result<Var, TensorError> {
        g.rows(self.hidden, 2 + self.n_code, self.len())
    }
}

/// Token plus position embeddings, normalised.
pub fn embed(g: &mut Graph<'_>, model: &Model, input: &EncoderInput) -> Result<Var, TensorError> {
    let w = &model.weights;
    let tokens = g.param(w.enc_tokens);
    let positions = g.param(w.enc_positions);
    let t = g.embedding(tokens, &input.ids)?;
    let p = g.embedding(positions, &input.positions)?;
    let x = g.add(t, p)?;
    let x = norm(g, x, &w.enc_norm)?;
    g.dropout(x, model.config.dropout)
}

/// The transformer stack over already embedded rows.
pub fn encode_embedded(g: &mut Graph<'_>, model: &Model, x: Var, mask: &AttnMask) -> Result<(Var, Vec<Var>, Vec<Var>), TensorError> {
    let mut x = x;
    let mut attention = Vec::new();
    let mut attention_out = Vec::new();
    let p = model.config.dropout;
    for layer in &model.weights.encoder {
        let a = multi_head(g, &layer.attn, x, x, model.config.heads, mask)?;
        attention.push(a.weights);
        attention_out.push(a.output);
        x = residual(g, x, a.output, &layer.norm1, p)?;
        let f = feed_forward(g, &layer.ffn, x)?;
        x = residual(g, x, f, &layer.norm2, p)?;
    }
    Ok((x, attention, attention_out))
}

pub fn graph_mask(input: &EncoderInput) -> AttnMask {
    AttnMask::Allowed(Arc::new(input.allowed.clone()))
}

pub fn encode(g: &mut Graph<'_>, model: &Model, input: &EncoderInput) -> Result<EncoderOutput, TensorError> {
    let x = embed(g, model, input)?;
    let (hidden, attention, attention_out) = encode_embedded(g, model, x, &graph_mask(input))?;
    Ok(EncoderOutput { hidden, n_code: input.n_code, n_vars: input.n_vars, attention, attention_out })
}

/// Clean and current versions encoded independently with shared weights.
pub fn encode_pair(
    g: &mut Graph<'_>,
    model: &Model,
    clean: &EncoderInput,
    current: &EncoderInput,
) -> Result<(EncoderOutput, EncoderOutput), TensorError> {
    Ok((encode(g, model, clean)?, encode(g, model, current)?))
}
