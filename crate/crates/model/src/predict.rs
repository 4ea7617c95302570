use fixline_lang::{detokenize, DefectLabel};
use fixline_tensor::{Graph, Tensor};
use serde::Serialize;

use crate::beam::{beam_search, greedy};
use crate::classify::{classify_change, predict_label, top_k};
use crate::decoder::{cross_context, Stepper};
use crate::encoder::encode_pair;
use crate::error::ModelError;
use crate::input::{build_input, prepare, EncoderInput};
use crate::model::Model;
use crate::vocab::{EOS, SOS};

/// Label distribution and decoder memory for a (clean, current) pair.
pub fn classify_pair(model: &Model, clean: &EncoderInput, current: &EncoderInput) -> Result<(Vec<f64>, Tensor), ModelError> {
    let w = &model.weights;
    let mut g = Graph::new(&model.params);
    let (ec, eb) = encode_pair(&mut g, model, clean, current)?;
    let hc = ec.h_cls(&mut g)?;
    let hb = eb.h_cls(&mut g)?;
    let cls = classify_change(&mut g, &w.ntn, &w.fuse, &w.classes, hc, hb)?;
    let memory = cross_context(&mut g, model, cls.fused, &eb)?;
    Ok((g.value(cls.probs).data.clone(), g.value(memory).clone()))
}

/// Best decoded token sequence and its log-probability.
pub fn generate(model: &Model, memory: &Tensor, beam_width: usize) -> (Vec<String>, f64) {
    let stepper = Stepper::new(model, memory);
    let max = model.config.max_decode_len;
    let best = if beam_width == 1 {
        greedy(&stepper, SOS, Some(EOS), max)
    } else {
        beam_search(&stepper, SOS, Some(EOS), beam_width, max).into_iter().next().expect("beam is never empty")
    };
    (model.vocab.decode(&best.ids), best.logprob)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Patch {
    pub text: String,
    pub logprob: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Analysis {
    pub label: DefectLabel,
    pub probabilities: Vec<f64>,
    pub top3: Vec<(DefectLabel, f64)>,
    /// Generated repair; only for non-clean predictions.
    pub patch: Option<Patch>,
}

/// Classifies the change from `clean` to `current` and, when it looks
/// defective, generates a repaired function.
pub fn analyze(model: &Model, clean: &str, current: &str, beam_width: usize) -> Result<Analysis, ModelError> {
    let c = prepare(clean)?;
    let b = prepare(current)?;
    let l = model.config.max_len;
    let ci = build_input(&c.tokens, &c.dfg, &model.vocab, l);
    let bi = build_input(&b.tokens, &b.dfg, &model.vocab, l);
    let (probs, memory) = classify_pair(model, &ci, &bi)?;
    let label = predict_label(&probs);
    let patch = if label.is_clean() {
        None
    } else {
        let (tokens, logprob) = generate(model, &memory, beam_width);
        Some(Patch { text: detokenize(&tokens), logprob })
    };
    Ok(Analysis { label, top3: top_k(&probs, 3), probabilities: probs, patch })
}
