use fixline_tensor::kernels::{attention, layer_norm, linear as dense};
use fixline_tensor::{AttnMask, Graph, ParamStore, Tensor, TensorError, Var};

use crate::beam::StepModel;
use crate::encoder::EncoderOutput;
use crate::error::ModelError;
use crate::layers::{feed_forward, linear, multi_head, norm, residual};
use crate::model::{AttentionWeights, FeedForward, Linear, Model, Norm};

/// Decoder memory: `[e; code states; sep state; node states]` of the
/// current version, with `e` projected to the model width when needed.
pub fn cross_context(g: &mut Graph<'_>, model: &Model, fused: Var, enc: &EncoderOutput) -> Result<Var, TensorError> {
    let e = match &model.weights.fused_proj {
        Some(p) => linear(g, fused, p)?,
        None => fused,
    };
    let rest = g.rows(enc.hidden, 1, enc.len())?;
    g.concat_rows(&[e, rest])
}

/// Teacher-forced logits `[prefix.len(), vocab]`: row `j` scores the token
/// after `prefix[..=j]`.
pub fn decoder_logits(g: &mut Graph<'_>, model: &Model, memory: Var, prefix: &[usize]) -> Result<Var, ModelError> {
    let max = model.config.max_decode_len;
    if prefix.is_empty() || prefix.len() > max {
        return Err(ModelError::PrefixTooLong { len: prefix.len(), max });
    }
    let w = &model.weights;
    let p = model.config.dropout;
    let tokens = g.param(w.dec_tokens);
    let positions = g.param(w.dec_positions);
    let t = g.embedding(tokens, prefix)?;
    let pos: Vec<usize> = (0..prefix.len()).collect();
    let pe = g.embedding(positions, &pos)?;
    let x = g.add(t, pe)?;
    let x = norm(g, x, &w.dec_norm)?;
    let mut x = g.dropout(x, p)?;
    for layer in &w.decoder {
        let a = multi_head(g, &layer.self_attn, x, x, model.config.heads, &AttnMask::Causal)?;
        x = residual(g, x, a.output, &layer.norm1, p)?;
        let c = multi_head(g, &layer.cross_attn, x, memory, model.config.heads, &AttnMask::Full)?;
        x = residual(g, x, c.output, &layer.norm2, p)?;
        let f = feed_forward(g, &layer.ffn, x)?;
        x = residual(g, x, f, &layer.norm3, p)?;
    }
    let h = linear(g, x, &w.head)?;
    let h = g.tanh(h)?;
    Ok(linear(g, h, &w.out)?)
}

/// Next-token distribution after `prefix`, recomputed from scratch.
pub fn decode_step(model: &Model, memory: &Tensor, prefix: &[usize]) -> Result<Vec<f64>, ModelError> {
    let mut g = Graph::new(&model.params);
    let m = g.input(memory.clone());
    let logits = decoder_logits(&mut g, model, m, prefix)?;
    let probs = g.softmax(logits)?;
    let v = g.value(probs);
    Ok(v.row_slice(v.rows() - 1).to_vec())
}

struct Lin<'a> {
    w: &'a [f64],
    b: Vec<f64>,
    inp: usize,
    out: usize,
}

impl<'a> Lin<'a> {
    fn new(p: &'a ParamStore, l: &Linear) -> Self {
        let w = p.get(l.w);
        let b = l.b.map_or_else(|| vec![0.0; w.shape[1]], |b| p.get(b).data.clone());
        Self { w: &w.data, b, inp: w.shape[0], out: w.shape[1] }
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        dense(x, x.len() / self.inp, self.w, self.inp, self.out, &self.b)
    }
}

struct LnRef<'a> {
    gamma: &'a [f64],
    beta: &'a [f64],
}

impl<'a> LnRef<'a> {
    fn new(p: &'a ParamStore, n: &Norm) -> Self {
        Self { gamma: &p.get(n.gamma).data, beta: &p.get(n.beta).data }
    }

    fn residual(&self, x: &[f64], sub: &[f64]) -> Vec<f64> {
        let s: Vec<f64> = x.iter().zip(sub).map(|(a, b)| a + b).collect();
        layer_norm(&s, self.gamma.len(), self.gamma, self.beta)
    }
}

struct AttnRef<'a> {
    q: Lin<'a>,
    k: Lin<'a>,
    v: Lin<'a>,
    o: Lin<'a>,
}

impl<'a> AttnRef<'a> {
    fn new(p: &'a ParamStore, a: &AttentionWeights) -> Self {
        Self { q: Lin::new(p, &a.q), k: Lin::new(p, &a.k), v: Lin::new(p, &a.v), o: Lin::new(p, &a.o) }
    }
}

struct LayerRef<'a> {
    self_attn: AttnRef<'a>,
    norm1: LnRef<'a>,
    cross_attn: AttnRef<'a>,
    norm2: LnRef<'a>,
    inner: Lin<'a>,
    outer: Lin<'a>,
    norm3: LnRef<'a>,
    mem_k: Vec<f64>,
    mem_v: Vec<f64>,
}

/// Incremental decoder with cached keys and values, for generation.
pub struct Stepper<'a> {
    d: usize,
    heads: usize,
    max_len: usize,
    mem_len: usize,
    tokens: &'a Tensor,
    positions: &'a Tensor,
    norm: LnRef<'a>,
    layers: Vec<LayerRef<'a>>,
    head: Lin<'a>,
    out: Lin<'a>,
}

/// Per-layer self-attention caches.
#[derive(Debug, Clone)]
pub struct StepState {
    len: usize,
    keys: Vec<Vec<f64>>,
    values: Vec<Vec<f64>>,
}

impl StepState {
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }
}

impl<'a> Stepper<'a> {
    pub fn new(model: &'a Model, memory: &Tensor) -> Self {
        let p = &model.params;
        let w = &model.weights;
        let mem_len = memory.rows();
        let layers = w
            .decoder
            .iter()
            .map(|l| {
                let cross_attn = AttnRef::new(p, &l.cross_attn);
                let mem_k = cross_attn.k.apply(&memory.data);
                let mem_v = cross_attn.v.apply(&memory.data);
                let FeedForward { inner, outer } = &l.ffn;
                LayerRef {
                    self_attn: AttnRef::new(p, &l.self_attn),
                    norm1: LnRef::new(p, &l.norm1),
                    cross_attn,
                    norm2: LnRef::new(p, &l.norm2),
                    inner: Lin::new(p, inner),
                    outer: Lin::new(p, outer),
                    norm3: LnRef::new(p, &l.norm3),
                    mem_k,
                    mem_v,
                }
            })
            .collect();
        Self {
            d: model.config.d_model,
            heads: model.config.heads,
            max_len: model.config.max_decode_len,
            mem_len,
            tokens: p.get(w.dec_tokens),
            positions: p.get(w.dec_positions),
            norm: LnRef::new(p, &w.dec_norm),
            layers,
            head: Lin::new(p, &w.head),
            out: Lin::new(p, &w.out),
        }
    }

    pub fn max_len(&self) -> usize {
        self.max_len
    }

    /// Logits for the token after `token`, which is appended to `state`.
    pub fn logits(&self, state: &mut StepState, token: usize) -> Result<Vec<f64>, ModelError> {
        let t = state.len;
        if t >= self.max_len {
            return Err(ModelError::PrefixTooLong { len: t + 1, max: self.max_len });
        }
        let d = self.d;
        let emb: Vec<f64> = self.tokens.row_slice(token).iter().zip(self.positions.row_slice(t)).map(|(a, b)| a + b).collect();
        let mut x = layer_norm(&emb, d, self.norm.gamma, self.norm.beta);
        for (l, layer) in self.layers.iter().enumerate() {
            let q = layer.self_attn.q.apply(&x);
            state.keys[l].extend(layer.self_attn.k.apply(&x));
            state.values[l].extend(layer.self_attn.v.apply(&x));
            let a = attention(&q, 1, &state.keys[l], &state.values[l], t + 1, d, self.heads, |_, _| true);
            x = layer.norm1.residual(&x, &layer.self_attn.o.apply(&a));
            let q = layer.cross_attn.q.apply(&x);
            let c = attention(&q, 1, &layer.mem_k, &layer.mem_v, self.mem_len, d, self.heads, |_, _| true);
            x = layer.norm2.residual(&x, &layer.cross_attn.o.apply(&c));
            let h: Vec<f64> = layer.inner.apply(&x).into_iter().map(|v| v.max(0.0)).collect();
            x = layer.norm3.residual(&x, &layer.outer.apply(&h));
        }
        state.len += 1;
        let e: Vec<f64> = self.head.apply(&x).into_iter().map(f64::tanh).collect();
        Ok(self.out.apply(&e))
    }
}

/// Natural-log softmax.
pub fn log_softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + logits.iter().map(|x| (x - max).exp()).sum::<f64>().ln();
    logits.iter().map(|x| x - lse).collect()
}

impl StepModel for Stepper<'_> {
    type State = StepState;

    fn vocab_size(&self) -> usize {
        self.out.out
    }

    fn initial(&self) -> StepState {
        let n = self.layers.len();
        StepState { len: 0, keys: vec![Vec::new(); n], values: vec![Vec::new(); n] }
    }

    fn feed(&self, state: &mut StepState, token: usize) -> Vec<f64> {
        let logits = self.logits(state, token).expect("beam length is bounded by the decode limit");
        log_softmax(&logits)
    }
}
