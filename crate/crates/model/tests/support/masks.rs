//! Mask checks by weight inspection and by perturbation.

use fixline_model::decoder::decoder_logits;
use fixline_model::encoder::{embed, encode, encode_embedded, graph_mask};
use fixline_model::{EncoderInput, Model};
use fixline_tensor::{AttnMask, Graph, ParamStore, Tensor};

/// Every encoder layer gives exactly zero weight to pairs the input
/// disallows. Returns the number of blocked entries seen.
pub fn graph_mask_weights(model: &Model, input: &EncoderInput) -> Result<usize, String> {
    let len = input.len();
    let heads = model.config.heads;
    let mut g = Graph::new(&model.params);
    let out = encode(&mut g, model, input).map_err(|e| e.to_string())?;
    let mut blocked = 0;
    for (layer, &a) in out.attention.iter().enumerate() {
        let w = g.attention_weights(a).ok_or("not an attention node")?;
        if w.len() != heads * len * len {
            return Err(format!("layer {layer}: {} weights", w.len()));
        }
        for h in 0..heads {
            for i in 0..len {
                let row = &w[(h * len + i) * len..(h * len + i + 1) * len];
                if (row.iter().sum::<f64>() - 1.0).abs() >= 1e-12 {
                    return Err(format!("layer {layer} head {h} row {i} does not sum to 1"));
                }
                for (j, &p) in row.iter().enumerate() {
                    if !input.allows(i, j) {
                        if p != 0.0 {
                            return Err(format!("layer {layer} head {h} ({i}, {j}) has weight {p}"));
                        }
                        blocked += 1;
                    }
                }
            }
        }
    }
    Ok(blocked)
}

/// Shifting the embedding of one position leaves the first layer's
/// attention output unchanged at every query that may not see it. Returns
/// the number of unchanged rows checked.
pub fn layer_one_invariance(model: &Model, input: &EncoderInput) -> Result<usize, String> {
    let len = input.len();
    let mask = graph_mask(input);
    let layer_one = |x: &Tensor| -> Result<Tensor, String> {
        let mut g = Graph::new(&model.params);
        let xv = g.input(x.clone());
        let (_, _, attn_out) = encode_embedded(&mut g, model, xv, &mask).map_err(|e| e.to_string())?;
        Ok(g.value(attn_out[0]).clone())
    };
    let base = {
        let mut g = Graph::new(&model.params);
        let x = embed(&mut g, model, input).map_err(|e| e.to_string())?;
        g.value(x).clone()
    };
    let reference = layer_one(&base)?;
    let d = model.config.d_model;
    let mut checked = 0;
    for j in 0..len {
        let mut x = base.clone();
        for v in &mut x.data[j * d..(j + 1) * d] {
            *v += 3.7;
        }
        let changed = layer_one(&x)?;
        for p in 0..len {
            let same = changed.row_slice(p) == reference.row_slice(p);
            if !input.allows(p, j) {
                if !same {
                    return Err(format!("row {p} moved when blocked position {j} changed"));
                }
                checked += 1;
            } else if p == j && same {
                return Err(format!("row {p} ignored its own change"));
            }
        }
    }
    Ok(checked)
}

/// Causal attention weights above the diagonal are exactly zero.
pub fn causal_weights(len: usize, d: usize, heads: usize) -> Result<usize, String> {
    let store = ParamStore::new();
    let mut g = Graph::new(&store);
    let data: Vec<f64> = (0..len * d).map(|i| ((i * 37 % 11) as f64 - 5.0) / 3.0).collect();
    let x = g.input(Tensor::matrix(len, d, data).map_err(|e| e.to_string())?);
    let a = g.attention(x, x, x, heads, &AttnMask::Causal).map_err(|e| e.to_string())?;
    let w = g.attention_weights(a).ok_or("not an attention node")?;
    let mut blocked = 0;
    for h in 0..heads {
        for i in 0..len {
            for j in i + 1..len {
                let p = w[(h * len + i) * len + j];
                if p != 0.0 {
                    return Err(format!("head {h} ({i}, {j}) has weight {p}"));
                }
                blocked += 1;
            }
        }
    }
    Ok(blocked)
}

/// Decoder logits at a position do not depend on later tokens.
pub fn decoder_prefix_invariance(model: &Model, memory: &Tensor, a: &[usize], b: &[usize], shared: usize) -> Result<(), String> {
    let run = |prefix: &[usize]| -> Result<Tensor, String> {
        let mut g = Graph::new(&model.params);
        let m = g.input(memory.clone());
        let l = decoder_logits(&mut g, model, m, prefix).map_err(|e| e.to_string())?;
        Ok(g.value(l).clone())
    };
    let (x, y) = (run(a)?, run(b)?);
    for p in 0..shared {
        if x.row_slice(p) != y.row_slice(p) {
            return Err(format!("position {p} saw a later token"));
        }
    }
    Ok(())
}
