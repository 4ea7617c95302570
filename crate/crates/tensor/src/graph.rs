//! Tape-based reverse-mode automatic differentiation.
//!
//! A [`Graph`] borrows a [`ParamStore`] and records every operation in
//! creation order, which is a topological order; [`Graph::backward`] walks
//! the tape once in reverse.

use std::collections::HashMap;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{shape_err, TensorError};
use crate::kernels::{gemm, layer_norm_row, softmax_in_place, MASK_VALUE};
use crate::params::{Gradients, ParamId, ParamStore};
use crate::tensor::Tensor;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var(usize);

/// Which key positions each query position may attend.
#[derive(Debug, Clone)]
pub enum AttnMask {
    Full,
    /// Query `i` sees keys `0..=i`.
    Causal,
    /// Row-major `lq x lk` table of allowed pairs.
    Allowed(Arc<Vec<bool>>),
}

impl AttnMask {
    fn allows(&self, lk: usize, i: usize, j: usize) -> bool {
        match self {
            AttnMask::Full => true,
            AttnMask::Causal => j <= i,
            AttnMask::Allowed(m) => m[i * lk + j],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OpKind {
    Input,
    Param,
    MatMul,
    Add,
    Mul,
    Scale,
    Sum,
    Concat,
    Rows,
    Reshape,
    Embedding,
    ReLU,
    Tanh,
    Softmax,
    LayerNorm,
    Dropout,
    MaskedAttention,
    CrossEntropy,
}

enum Op {
    Input,
    Param(ParamId),
    MatMul { a: Var, b: Var, b_t: bool },
    Add(Var, Var),
    AddRow(Var, Var),
    Mul(Var, Var),
    Scale(Var, f64),
    Sum(Var),
    ConcatCols(Vec<Var>),
    ConcatRows(Vec<Var>),
    Rows(Var, usize),
    Reshape(Var),
    Embedding { table: Var, ids: Vec<usize> },
    Relu(Var),
    Tanh(Var),
    Softmax(Var),
    LayerNorm { x: Var, gamma: Var, beta: Var, xhat: Vec<f64>, inv_std: Vec<f64> },
    Dropout { x: Var, mask: Vec<f64> },
    Attention { q: Var, k: Var, v: Var, heads: usize, probs: Vec<f64> },
    CrossEntropy { logits: Var, targets: Vec<Option<usize>>, probs: Vec<f64> },
}

impl Op {
    fn kind(&self) -> OpKind {
        match self {
            Op::Input => OpKind::Input,
            Op::Param(_) => OpKind::Param,
            Op::MatMul { .. } => OpKind::MatMul,
            Op::Add(..) | Op::AddRow(..) => OpKind::Add,
            Op::Mul(..) => OpKind::Mul,
            Op::Scale(..) => OpKind::Scale,
            Op::Sum(_) => OpKind::Sum,
            Op::ConcatCols(_) | Op::ConcatRows(_) => OpKind::Concat,
            Op::Rows(..) => OpKind::Rows,
            Op::Reshape(_) => OpKind::Reshape,
            Op::Embedding { .. } => OpKind::Embedding,
            Op::Relu(_) => OpKind::ReLU,
            Op::Tanh(_) => OpKind::Tanh,
            Op::Softmax(_) => OpKind::Softmax,
            Op::LayerNorm { .. } => OpKind::LayerNorm,
            Op::Dropout { .. } => OpKind::Dropout,
            Op::Attention { .. } => OpKind::MaskedAttention,
            Op::CrossEntropy { .. } => OpKind::CrossEntropy,
        }
    }
}

struct Node {
    /// `None` for parameters, whose value lives in the store.
    value: Option<Tensor>,
    op: Op,
}

pub struct Graph<'p> {
    store: &'p ParamStore,
    nodes: Vec<Node>,
    param_nodes: HashMap<ParamId, Var>,
    train: bool,
    rng: ChaCha8Rng,
    stochastic_ops: usize,
}

fn name(kind: OpKind) -> &'static str {
    match kind {
        OpKind::Input => "input",
        OpKind::Param => "param",
        OpKind::MatMul => "matmul",
        OpKind::Add => "add",
        OpKind::Mul => "mul",
        OpKind::Scale => "scale",
        OpKind::Sum => "sum",
        OpKind::Concat => "concat",
        OpKind::Rows => "rows",
        OpKind::Reshape => "reshape",
        OpKind::Embedding => "embedding",
        OpKind::ReLU => "relu",
        OpKind::Tanh => "tanh",
        OpKind::Softmax => "softmax",
        OpKind::LayerNorm => "layer_norm",
        OpKind::Dropout => "dropout",
        OpKind::MaskedAttention => "masked_attention",
        OpKind::CrossEntropy => "cross_entropy",
    }
}

fn add_into(dst: &mut [f64], src: &[f64]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d += s;
    }
}

impl<'p> Graph<'p> {
    /// Evaluation-mode graph: dropout is the identity.
    pub fn new(store: &'p ParamStore) -> Self {
        Self {
            store,
            nodes: Vec::new(),
            param_nodes: HashMap::new(),
            train: false,
            rng: ChaCha8Rng::seed_from_u64(0),
            stochastic_ops: 0,
        }
    }

    /// Training-mode graph whose dropout masks come from `seed`.
    pub fn training(store: &'p ParamStore, seed: u64) -> Self {
        Self { train: true, rng: ChaCha8Rng::seed_from_u64(seed), ..Self::new(store) }
    }

    /// Switches dropout on for the rest of this graph.
    pub fn enable_dropout(&mut self, seed: u64) {
        self.train = true;
        self.rng = ChaCha8Rng::seed_from_u64(seed);
    }

    pub fn is_training(&self) -> bool {
        self.train
    }

    pub fn store(&self) -> &'p ParamStore {
        self.store
    }

    /// Number of dropout operations that actually drew random masks.
    pub fn stochastic_ops(&self) -> usize {
        self.stochastic_ops
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn value(&self, v: Var) -> &Tensor {
        let node = &self.nodes[v.0];
        match (&node.value, &node.op) {
            (Some(t), _) => t,
            (None, Op::Param(id)) => self.store.get(*id),
            (None, _) => unreachable!("non-parameter node without value"),
        }
    }

    pub fn shape(&self, v: Var) -> &[usize] {
        &self.value(v).shape
    }

    pub fn op_kind(&self, v: Var) -> OpKind {
        self.nodes[v.0].op.kind()
    }

    /// Attention weights `[heads, lq, lk]` of a masked-attention node.
    pub fn attention_weights(&self, v: Var) -> Option<&[f64]> {
        match &self.nodes[v.0].op {
            Op::Attention { probs, .. } => Some(probs),
            _ => None,
        }
    }

    fn push(&mut self, value: Tensor, op: Op) -> Result<Var, TensorError> {
        if !value.is_finite() {
            return Err(TensorError::NonFiniteValue { op: name(op.kind()) });
        }
        self.nodes.push(Node { value: Some(value), op });
        Ok(Var(self.nodes.len() - 1))
    }

    pub fn input(&mut self, t: Tensor) -> Var {
        self.nodes.push(Node { value: Some(t), op: Op::Input });
        Var(self.nodes.len() - 1)
    }

    /// The node for a stored parameter; repeated calls share one node so
    /// gradients from every use accumulate.
    pub fn param(&mut self, id: ParamId) -> Var {
        if let Some(v) = self.param_nodes.get(&id) {
            return *v;
        }
        self.nodes.push(Node { value: None, op: Op::Param(id) });
        let v = Var(self.nodes.len() - 1);
        self.param_nodes.insert(id, v);
        v
    }

    fn dims2(&self, v: Var) -> (usize, usize) {
        let t = self.value(v);
        (t.rows(), t.cols())
    }

    /// `a (m x k) * b (k x n)`.
    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var, TensorError> {
        let (m, k) = self.dims2(a);
        let (k2, n) = self.dims2(b);
        if k != k2 {
            return Err(shape_err("matmul", format!("{:?} x {:?}", self.shape(a), self.shape(b))));
        }
        let mut out = vec![0.0; m * n];
        gemm(m, k, n, &self.value(a).data, false, &self.value(b).data, false, &mut out, 0.0);
        self.push(Tensor { shape: vec![m, n], data: out }, Op::MatMul { a, b, b_t: false })
    }

    /// `a (m x k) * b^T` for `b (n x k)`.
    pub fn matmul_nt(&mut self, a: Var, b: Var) -> Result<Var, TensorError> {
        let (m, k) = self.dims2(a);
        let (n, k2) = self.dims2(b);
        if k != k2 {
            return Err(shape_err("matmul", format!("{:?} x {:?}^T", self.shape(a), self.shape(b))));
        }
        let mut out = vec![0.0; m * n];
        gemm(m, k, n, &self.value(a).data, false, &self.value(b).data, true, &mut out, 0.0);
        self.push(Tensor { shape: vec![m, n], data: out }, Op::MatMul { a, b, b_t: true })
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var, TensorError> {
        let (ta, tb) = (self.value(a), self.value(b));
        if ta.shape != tb.shape {
            return Err(shape_err("add", format!("{:?} + {:?}", ta.shape, tb.shape)));
        }
        let data = ta.data.iter().zip(&tb.data).map(|(x, y)| x + y).collect();
        let shape = ta.shape.clone();
        self.push(Tensor { shape, data }, Op::Add(a, b))
    }

    /// Adds the vector `b` to every row of `a`.
    pub fn add_row(&mut self, a: Var, b: Var) -> Result<Var, TensorError> {
        let (ta, tb) = (self.value(a), self.value(b));
        let c = ta.cols();
        if tb.len() != c {
            return Err(shape_err("add", format!("row broadcast {:?} + {:?}", ta.shape, tb.shape)));
        }
        let mut data = ta.data.clone();
        for row in data.chunks_mut(c) {
            add_into(row, &tb.data);
        }
        let shape = ta.shape.clone();
        self.push(Tensor { shape, data }, Op::AddRow(a, b))
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var, TensorError> {
        let (ta, tb) = (self.value(a), self.value(b));
        if ta.shape != tb.shape {
            return Err(shape_err("mul", format!("{:?} * {:?}", ta.shape, tb.shape)));
        }
        let data = ta.data.iter().zip(&tb.data).map(|(x, y)| x * y).collect();
        let shape = ta.shape.clone();
        self.push(Tensor { shape, data }, Op::Mul(a, b))
    }

    pub fn scale(&mut self, a: Var, s: f64) -> Result<Var, TensorError> {
        let t = self.value(a);
        let data = t.data.iter().map(|x| x * s).collect();
        let shape = t.shape.clone();
        self.push(Tensor { shape, data }, Op::Scale(a, s))
    }

    /// Sum of all entries, as a `[1]` tensor.
    pub fn sum(&mut self, a: Var) -> Result<Var, TensorError> {
        let s = self.value(a).data.iter().sum();
        self.push(Tensor::scalar(s), Op::Sum(a))
    }

    pub fn concat_cols(&mut self, parts: &[Var]) -> Result<Var, TensorError> {
        let rows = self.value(parts[0]).rows();
        if parts.iter().any(|p| self.value(*p).rows() != rows) {
            return Err(shape_err("concat", "column concatenation needs equal row counts"));
        }
        let total: usize = parts.iter().map(|p| self.value(*p).cols()).sum();
        let mut data = Vec::with_capacity(rows * total);
        for r in 0..rows {
            for p in parts {
                data.extend_from_slice(self.value(*p).row_slice(r));
            }
        }
        self.push(Tensor { shape: vec![rows, total], data }, Op::ConcatCols(parts.to_vec()))
    }

    pub fn concat_rows(&mut self, parts: &[Var]) -> Result<Var, TensorError> {
        let cols = self.value(parts[0]).cols();
        if parts.iter().any(|p| self.value(*p).cols() != cols) {
            return Err(shape_err("concat", "row concatenation needs equal column counts"));
        }
        let mut data = Vec::new();
        for p in parts {
            data.extend_from_slice(&self.value(*p).data);
        }
        let rows = data.len() / cols.max(1);
        self.push(Tensor { shape: vec![rows, cols], data }, Op::ConcatRows(parts.to_vec()))
    }

    /// Rows `start..end` of a 2-d tensor.
    pub fn rows(&mut self, a: Var, start: usize, end: usize) -> Result<Var, TensorError> {
        let (r, c) = self.dims2(a);
        if start > end || end > r {
            return Err(shape_err("rows", format!("{start}..{end} of {r} rows")));
        }
        let data = self.value(a).data[start * c..end * c].to_vec();
        self.push(Tensor { shape: vec![end - start, c], data }, Op::Rows(a, start))
    }

    pub fn reshape(&mut self, a: Var, shape: &[usize]) -> Result<Var, TensorError> {
        let t = self.value(a);
        if shape.iter().product::<usize>() != t.len() {
            return Err(shape_err("reshape", format!("{:?} -> {shape:?}", t.shape)));
        }
        let data = t.data.clone();
        self.push(Tensor { shape: shape.to_vec(), data }, Op::Reshape(a))
    }

    /// Rows of `table` selected by `ids`.
    pub fn embedding(&mut self, table: Var, ids: &[usize]) -> Result<Var, TensorError> {
        let (v, d) = self.dims2(table);
        if let Some(bad) = ids.iter().find(|&&i| i >= v) {
            return Err(shape_err("embedding", format!("id {bad} out of range for {v} rows")));
        }
        let t = self.value(table);
        let mut data = Vec::with_capacity(ids.len() * d);
        for &i in ids {
            data.extend_from_slice(t.row_slice(i));
        }
        self.push(Tensor { shape: vec![ids.len(), d], data }, Op::Embedding { table, ids: ids.to_vec() })
    }

    pub fn relu(&mut self, a: Var) -> Result<Var, TensorError> {
        let t = self.value(a);
        let data = t.data.iter().map(|x| x.max(0.0)).collect();
        let shape = t.shape.clone();
        self.push(Tensor { shape, data }, Op::Relu(a))
    }

    pub fn tanh(&mut self, a: Var) -> Result<Var, TensorError> {
        let t = self.value(a);
        let data = t.data.iter().map(|x| x.tanh()).collect();
        let shape = t.shape.clone();
        self.push(Tensor { shape, data }, Op::Tanh(a))
    }

    /// Row-wise softmax.
    pub fn softmax(&mut self, a: Var) -> Result<Var, TensorError> {
        let t = self.value(a);
        let c = t.cols();
        let mut data = t.data.clone();
        for row in data.chunks_mut(c) {
            softmax_in_place(row);
        }
        let shape = t.shape.clone();
        self.push(Tensor { shape, data }, Op::Softmax(a))
    }

    /// Row-wise layer normalisation with gain `gamma` and bias `beta`.
    pub fn layer_norm(&mut self, x: Var, gamma: Var, beta: Var) -> Result<Var, TensorError> {
        let (r, c) = self.dims2(x);
        if self.value(gamma).len() != c || self.value(beta).len() != c {
            return Err(shape_err("layer_norm", format!("width {c} vs gain {:?}", self.shape(gamma))));
        }
        let mut xhat = vec![0.0; r * c];
        let mut inv_std = vec![0.0; r];
        let tx = self.value(x);
        for i in 0..r {
            inv_std[i] = layer_norm_row(tx.row_slice(i), &mut xhat[i * c..(i + 1) * c]);
        }
        let (g, b) = (&self.value(gamma).data, &self.value(beta).data);
        let mut out = xhat.clone();
        for row in out.chunks_mut(c) {
            for ((o, gi), bi) in row.iter_mut().zip(g).zip(b) {
                *o = *o * gi + bi;
            }
        }
        let shape = tx.shape.clone();
        self.push(Tensor { shape, data: out }, Op::LayerNorm { x, gamma, beta, xhat, inv_std })
    }

    /// Inverted dropout. The identity in evaluation mode or when `p == 0`.
    pub fn dropout(&mut self, x: Var, p: f64) -> Result<Var, TensorError> {
        if !self.train || p <= 0.0 {
            return Ok(x);
        }
        self.stochastic_ops += 1;
        let keep = 1.0 - p;
        let t = self.value(x);
        let n = t.len();
        let shape = t.shape.clone();
        let mask: Vec<f64> = (0..n).map(|_| if self.rng.gen::<f64>() < p { 0.0 } else { 1.0 / keep }).collect();
        let data = self.value(x).data.iter().zip(&mask).map(|(a, m)| a * m).collect();
        self.push(Tensor { shape, data }, Op::Dropout { x, mask })
    }

    /// Multi-head scaled dot-product attention with additive masking.
    /// `q` is `lq x d`, `k` and `v` are `lk x d`; heads split the columns.
    pub fn attention(&mut self, q: Var, k: Var, v: Var, heads: usize, mask: &AttnMask) -> Result<Var, TensorError> {
        let (lq, d) = self.dims2(q);
        let (lk, dk) = self.dims2(k);
        let (lv, dv) = self.dims2(v);
        if dk != d || dv != d || lv != lk || heads == 0 || d % heads != 0 {
            return Err(shape_err("masked_attention", format!("q {lq}x{d}, k {lk}x{dk}, v {lv}x{dv}, {heads} heads")));
        }
        if let AttnMask::Allowed(m) = mask {
            if m.len() != lq * lk {
                return Err(shape_err("masked_attention", format!("mask of {} entries for {lq}x{lk}", m.len())));
            }
        }
        let dh = d / heads;
        let scale = 1.0 / (dh as f64).sqrt();
        let mut probs = vec![0.0; heads * lq * lk];
        let mut out = vec![0.0; lq * d];
        let (tq, tk, tv) = (self.value(q), self.value(k), self.value(v));
        let mut qh = vec![0.0; lq * dh];
        let mut kh = vec![0.0; lk * dh];
        let mut vh = vec![0.0; lk * dh];
        let mut oh = vec![0.0; lq * dh];
        for h in 0..heads {
            gather_head(&tq.data, d, h * dh, dh, &mut qh);
            gather_head(&tk.data, d, h * dh, dh, &mut kh);
            gather_head(&tv.data, d, h * dh, dh, &mut vh);
            let p = &mut probs[h * lq * lk..(h + 1) * lq * lk];
            gemm(lq, dh, lk, &qh, false, &kh, true, p, 0.0);
            for i in 0..lq {
                let row = &mut p[i * lk..(i + 1) * lk];
                for (j, s) in row.iter_mut().enumerate() {
                    *s *= scale;
                    if !mask.allows(lk, i, j) {
                        *s += MASK_VALUE;
                    }
                }
                softmax_in_place(row);
            }
            gemm(lq, lk, dh, p, false, &vh, false, &mut oh, 0.0);
            scatter_head(&oh, d, h * dh, dh, &mut out);
        }
        self.push(Tensor { shape: vec![lq, d], data: out }, Op::Attention { q, k, v, heads, probs })
    }

    /// Summed negative log-likelihood of `targets` under row-wise softmax
    /// of `logits`; rows with `None` are ignored. Returns a `[1]` tensor.
    pub fn cross_entropy(&mut self, logits: Var, targets: &[Option<usize>]) -> Result<Var, TensorError> {
        let (r, c) = self.dims2(logits);
        if targets.len() != r {
            return Err(shape_err("cross_entropy", format!("{} targets for {r} rows", targets.len())));
        }
        if let Some(bad) = targets.iter().flatten().find(|&&t| t >= c) {
            return Err(shape_err("cross_entropy", format!("target {bad} out of range for {c} classes")));
        }
        let t = self.value(logits);
        let mut probs = t.data.clone();
        let mut loss = 0.0;
        for (i, target) in targets.iter().enumerate() {
            let row = &t.data[i * c..(i + 1) * c];
            let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let lse = max + row.iter().map(|x| (x - max).exp()).sum::<f64>().ln();
            if let Some(t) = target {
                loss += lse - row[*t];
            }
            softmax_in_place(&mut probs[i * c..(i + 1) * c]);
        }
        self.push(Tensor::scalar(loss), Op::CrossEntropy { logits, targets: targets.to_vec(), probs })
    }

    /// Gradients of the scalar `loss` with respect to every parameter used.
    pub fn backward(&self, loss: Var) -> Result<Gradients, TensorError> {
        let lt = self.value(loss);
        if lt.len() != 1 {
            return Err(TensorError::NonScalarLoss(lt.shape.clone()));
        }
        let mut grads: Vec<Option<Vec<f64>>> = (0..self.nodes.len()).map(|_| None).collect();
        grads[loss.0] = Some(vec![1.0]);
        for i in (0..=loss.0).rev() {
            let Some(g) = grads[i].take() else { continue };
            self.backprop_node(i, &g, &mut grads);
            grads[i] = Some(g);
        }
        let mut out = Gradients::zeros_like(self.store);
        for (id, v) in &self.param_nodes {
            if let Some(g) = grads[v.0].take() {
                out.grads[id.0] = Some(Tensor { shape: self.store.get(*id).shape.clone(), data: g });
            }
        }
        Ok(out)
    }

    fn backprop_node(&self, i: usize, g: &[f64], grads: &mut [Option<Vec<f64>>]) {
        let mut acc = |v: Var, delta: &[f64]| match &mut grads[v.0] {
            Some(existing) => add_into(existing, delta),
            slot @ None => *slot = Some(delta.to_vec()),
        };
        match &self.nodes[i].op {
            Op::Input | Op::Param(_) => {}
            Op::MatMul { a, b, b_t } => {
                let (m, k) = self.dims2(*a);
                let n = self.value(Var(i)).cols();
                let (ta, tb) = (&self.value(*a).data, &self.value(*b).data);
                let mut da = vec![0.0; m * k];
                // dA = dC * op(B)^T
                gemm(m, n, k, g, false, tb, !*b_t, &mut da, 0.0);
                acc(*a, &da);
                let mut db = vec![0.0; k * n];
                if *b_t {
                    // B is n x k: dB = dC^T * A
                    gemm(n, m, k, g, true, ta, false, &mut db, 0.0);
                } else {
                    gemm(k, m, n, ta, true, g, false, &mut db, 0.0);
                }
                acc(*b, &db);
            }
            Op::Add(a, b) => {
                acc(*a, g);
                acc(*b, g);
            }
            Op::AddRow(a, b) => {
                acc(*a, g);
                let c = self.value(*b).len();
                let mut db = vec![0.0; c];
                for row in g.chunks(c) {
                    add_into(&mut db, row);
                }
                acc(*b, &db);
            }
            Op::Mul(a, b) => {
                let (ta, tb) = (&self.value(*a).data, &self.value(*b).data);
                let da: Vec<f64> = g.iter().zip(tb).map(|(x, y)| x * y).collect();
                let db: Vec<f64> = g.iter().zip(ta).map(|(x, y)| x * y).collect();
                acc(*a, &da);
                acc(*b, &db);
            }
            Op::Scale(a, s) => {
                let da: Vec<f64> = g.iter().map(|x| x * s).collect();
                acc(*a, &da);
            }
            Op::Sum(a) => {
                let n = self.value(*a).len();
                acc(*a, &vec![g[0]; n]);
            }
            Op::ConcatCols(parts) => {
                let total = self.value(Var(i)).cols();
                let rows = self.value(Var(i)).rows();
                let mut offset = 0;
                for p in parts {
                    let c = self.value(*p).cols();
                    let mut dp = Vec::with_capacity(rows * c);
                    for r in 0..rows {
                        dp.extend_from_slice(&g[r * total + offset..r * total + offset + c]);
                    }
                    acc(*p, &dp);
                    offset += c;
                }
            }
            Op::ConcatRows(parts) => {
                let mut offset = 0;
                for p in parts {
                    let n = self.value(*p).len();
                    acc(*p, &g[offset..offset + n]);
                    offset += n;
                }
            }
            Op::Rows(a, start) => {
                let t = self.value(*a);
                let c = t.cols();
                let mut da = vec![0.0; t.len()];
                da[start * c..start * c + g.len()].copy_from_slice(g);
                acc(*a, &da);
            }
            Op::Reshape(a) => acc(*a, g),
            Op::Embedding { table, ids } => {
                let t = self.value(*table);
                let d = t.cols();
                let mut dt = vec![0.0; t.len()];
                for (r, &id) in ids.iter().enumerate() {
                    add_into(&mut dt[id * d..(id + 1) * d], &g[r * d..(r + 1) * d]);
                }
                acc(*table, &dt);
            }
            Op::Relu(a) => {
                let x = &self.value(*a).data;
                let da: Vec<f64> = g.iter().zip(x).map(|(gi, xi)| if *xi > 0.0 { *gi } else { 0.0 }).collect();
                acc(*a, &da);
            }
            Op::Tanh(a) => {
                let y = &self.value(Var(i)).data;
                let da: Vec<f64> = g.iter().zip(y).map(|(gi, yi)| gi * (1.0 - yi * yi)).collect();
                acc(*a, &da);
            }
            Op::Softmax(a) => {
                let y = &self.value(Var(i)).data;
                let c = self.value(Var(i)).cols();
                let mut da = vec![0.0; y.len()];
                for ((yr, gr), dr) in y.chunks(c).zip(g.chunks(c)).zip(da.chunks_mut(c)) {
                    let dot: f64 = yr.iter().zip(gr).map(|(p, q)| p * q).sum();
                    for ((d, p), q) in dr.iter_mut().zip(yr).zip(gr) {
                        *d = p * (q - dot);
                    }
                }
                acc(*a, &da);
            }
            Op::LayerNorm { x, gamma, beta, xhat, inv_std } => {
                let c = self.value(*x).cols();
                let gam = &self.value(*gamma).data;
                let mut dx = vec![0.0; xhat.len()];
                let mut dg = vec![0.0; c];
                let mut dbeta = vec![0.0; c];
                let n = c as f64;
                let mut dxhat = vec![0.0; c];
                for r in 0..inv_std.len() {
                    let gr = &g[r * c..(r + 1) * c];
                    let hr = &xhat[r * c..(r + 1) * c];
                    for j in 0..c {
                        dxhat[j] = gr[j] * gam[j];
                        dg[j] += gr[j] * hr[j];
                        dbeta[j] += gr[j];
                    }
                    let s1: f64 = dxhat.iter().sum();
                    let s2: f64 = dxhat.iter().zip(hr).map(|(a, b)| a * b).sum();
                    for j in 0..c {
                        dx[r * c + j] = inv_std[r] / n * (n * dxhat[j] - s1 - hr[j] * s2);
                    }
                }
                acc(*x, &dx);
                acc(*gamma, &dg);
                acc(*beta, &dbeta);
            }
            Op::Dropout { x, mask } => {
                let dx: Vec<f64> = g.iter().zip(mask).map(|(a, m)| a * m).collect();
                acc(*x, &dx);
            }
            Op::Attention { q, k, v, heads, probs } => {
                let (lq, d) = self.dims2(*q);
                let lk = self.value(*k).rows();
                let dh = d / heads;
                let scale = 1.0 / (dh as f64).sqrt();
                let (tq, tk, tv) = (&self.value(*q).data, &self.value(*k).data, &self.value(*v).data);
                let mut dq = vec![0.0; lq * d];
                let mut dk = vec![0.0; lk * d];
                let mut dv = vec![0.0; lk * d];
                let mut qh = vec![0.0; lq * dh];
                let mut kh = vec![0.0; lk * dh];
                let mut vh = vec![0.0; lk * dh];
                let mut goh = vec![0.0; lq * dh];
                let mut dp = vec![0.0; lq * lk];
                let mut tmp_q = vec![0.0; lq * dh];
                let mut tmp_k = vec![0.0; lk * dh];
                for h in 0..*heads {
                    gather_head(tq, d, h * dh, dh, &mut qh);
                    gather_head(tk, d, h * dh, dh, &mut kh);
                    gather_head(tv, d, h * dh, dh, &mut vh);
                    gather_head(g, d, h * dh, dh, &mut goh);
                    let p = &probs[h * lq * lk..(h + 1) * lq * lk];
                    // dV = P^T dO
                    gemm(lk, lq, dh, p, true, &goh, false, &mut tmp_k, 0.0);
                    scatter_head(&tmp_k, d, h * dh, dh, &mut dv);
                    // dP = dO V^T, then softmax backward into dS (in dp).
                    gemm(lq, dh, lk, &goh, false, &vh, true, &mut dp, 0.0);
                    for r in 0..lq {
                        let pr = &p[r * lk..(r + 1) * lk];
                        let dr = &mut dp[r * lk..(r + 1) * lk];
                        let dot: f64 = pr.iter().zip(dr.iter()).map(|(a, b)| a * b).sum();
                        for (x, pj) in dr.iter_mut().zip(pr) {
                            *x = pj * (*x - dot) * scale;
                        }
                    }
                    gemm(lq, lk, dh, &dp, false, &kh, false, &mut tmp_q, 0.0);
                    scatter_head(&tmp_q, d, h * dh, dh, &mut dq);
                    gemm(lk, lq, dh, &dp, true, &qh, false, &mut tmp_k, 0.0);
                    scatter_head(&tmp_k, d, h * dh, dh, &mut dk);
                }
                acc(*q, &dq);
                acc(*k, &dk);
                acc(*v, &dv);
            }
            Op::CrossEntropy { logits, targets, probs } => {
                let c = self.value(*logits).cols();
                let mut dl = vec![0.0; probs.len()];
                for (r, t) in targets.iter().enumerate() {
                    if let Some(t) = t {
                        for j in 0..c {
                            dl[r * c + j] = g[0] * (probs[r * c + j] - if j == *t { 1.0 } else { 0.0 });
                        }
                    }
                }
                acc(*logits, &dl);
            }
        }
    }
}

/// Copies columns `off..off+w` of a row-major matrix with `d` columns.
fn gather_head(src: &[f64], d: usize, off: usize, w: usize, dst: &mut [f64]) {
    for (r, out) in dst.chunks_mut(w).enumerate() {
        out.copy_from_slice(&src[r * d + off..r * d + off + w]);
    }
}

/// Adds a `rows x w` block into columns `off..off+w` of `dst`.
fn scatter_head(src: &[f64], d: usize, off: usize, w: usize, dst: &mut [f64]) {
    for (r, block) in src.chunks(w).enumerate() {
        add_into(&mut dst[r * d + off..r * d + off + w], block);
    }
}
