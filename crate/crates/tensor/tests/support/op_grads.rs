//! Finite-difference checks covering every differentiable graph operation.
//! Each check returns the maximum relative error it saw.

use std::sync::Arc;

use fixline_tensor::{grad_check, init_rng, AttnMask, GradCheckOptions, Graph, Init, ParamStore, Tensor, TensorError, Var};
use rand::Rng;

pub type OpCheck = fn() -> Result<f64, TensorError>;

pub const CHECKS: &[(&str, OpCheck)] = &[
    ("matmul, matmul_nt, concat_cols", matmul_ops),
    ("add, add_row, mul, scale, embedding, concat_rows, rows, reshape", structural_ops),
    ("relu", || nonlinearity(0)),
    ("tanh", || nonlinearity(1)),
    ("softmax", || nonlinearity(2)),
    ("layer_norm", layer_norm),
    ("attention (full)", || attention(0)),
    ("attention (allowed table)", || attention(1)),
    ("attention (causal)", || attention(2)),
    ("cross_entropy", cross_entropy),
    ("two-layer mlp", mlp),
];

pub fn random(shape: &[usize], seed: u64) -> Tensor {
    let mut rng = init_rng(seed);
    let n = shape.iter().product();
    Tensor::new(shape.to_vec(), (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap()
}

/// Projects `out` onto fixed random weights so every output entry matters.
pub fn probe(g: &mut Graph<'_>, out: Var, seed: u64) -> Result<Var, TensorError> {
    let r = g.input(random(&g.value(out).shape.clone(), seed));
    let m = g.mul(out, r)?;
    g.sum(m)
}

pub fn check(store: &mut ParamStore, f: impl FnMut(&mut Graph<'_>) -> Result<Var, TensorError>) -> Result<f64, TensorError> {
    Ok(grad_check(store, f, &GradCheckOptions::default())?.max_rel_error)
}

pub fn store_with(entries: &[(&str, &[usize])]) -> ParamStore {
    let mut s = ParamStore::new();
    for (i, (name, shape)) in entries.iter().enumerate() {
        s.add(name, random(shape, 100 + i as u64));
    }
    s
}

fn matmul_ops() -> Result<f64, TensorError> {
    let mut s = store_with(&[("a", &[3, 4]), ("b", &[4, 2]), ("c", &[5, 4])]);
    let ids: Vec<_> = s.ids().collect();
    check(&mut s, |g| {
        let (a, b, c) = (g.param(ids[0]), g.param(ids[1]), g.param(ids[2]));
        let ab = g.matmul(a, b)?;
        let ac = g.matmul_nt(a, c)?;
        let x = g.concat_cols(&[ab, ac])?;
        probe(g, x, 1)
    })
}

fn structural_ops() -> Result<f64, TensorError> {
    let mut s = store_with(&[("a", &[4, 3]), ("b", &[4, 3]), ("bias", &[3]), ("t", &[6, 3])]);
    let ids: Vec<_> = s.ids().collect();
    check(&mut s, |g| {
        let (a, b, bias, t) = (g.param(ids[0]), g.param(ids[1]), g.param(ids[2]), g.param(ids[3]));
        let x = g.add(a, b)?;
        let x = g.add_row(x, bias)?;
        let y = g.mul(x, a)?;
        let y = g.scale(y, 0.7)?;
        let e = g.embedding(t, &[5, 0, 5, 2])?;
        let z = g.concat_rows(&[y, e])?;
        let z = g.rows(z, 1, 7)?;
        let z = g.reshape(z, &[3, 6])?;
        probe(g, z, 2)
    })
}

fn nonlinearity(which: usize) -> Result<f64, TensorError> {
    let mut s = store_with(&[("x", &[3, 5])]);
    let id = s.ids().next().unwrap();
    check(&mut s, |g| {
        let x = g.param(id);
        let y = match which {
            0 => g.relu(x)?,
            1 => g.tanh(x)?,
            _ => g.softmax(x)?,
        };
        probe(g, y, 3)
    })
}

fn layer_norm() -> Result<f64, TensorError> {
    let mut s = store_with(&[("x", &[3, 6]), ("gamma", &[6]), ("beta", &[6])]);
    let ids: Vec<_> = s.ids().collect();
    check(&mut s, |g| {
        let (x, gamma, beta) = (g.param(ids[0]), g.param(ids[1]), g.param(ids[2]));
        let y = g.layer_norm(x, gamma, beta)?;
        probe(g, y, 4)
    })
}

fn attention(which: usize) -> Result<f64, TensorError> {
    let mut s = store_with(&[("q", &[3, 4]), ("k", &[5, 4]), ("v", &[5, 4]), ("self", &[5, 4])]);
    let ids: Vec<_> = s.ids().collect();
    let allowed: Vec<bool> = (0..15).map(|i| i % 3 != 1 || i % 5 == 0).collect();
    let mask = match which {
        0 => AttnMask::Full,
        1 => AttnMask::Allowed(Arc::new(allowed)),
        _ => AttnMask::Causal,
    };
    check(&mut s, |g| {
        let y = if which == 2 {
            let x = g.param(ids[3]);
            g.attention(x, x, x, 2, &mask)?
        } else {
            let (q, k, v) = (g.param(ids[0]), g.param(ids[1]), g.param(ids[2]));
            g.attention(q, k, v, 2, &mask)?
        };
        probe(g, y, 5 + which as u64)
    })
}

fn cross_entropy() -> Result<f64, TensorError> {
    let mut s = store_with(&[("logits", &[4, 5])]);
    let id = s.ids().next().unwrap();
    check(&mut s, |g| {
        let x = g.param(id);
        g.cross_entropy(x, &[Some(1), None, Some(4), Some(0)])
    })
}

fn mlp() -> Result<f64, TensorError> {
    let mut rng = init_rng(9);
    let mut s = ParamStore::new();
    let w1 = s.add_init("w1", &[4, 8], Init::Uniform(0.5), &mut rng);
    let b1 = s.add_init("b1", &[8], Init::Uniform(0.5), &mut rng);
    let w2 = s.add_init("w2", &[8, 3], Init::Uniform(0.5), &mut rng);
    let b2 = s.add_init("b2", &[3], Init::Uniform(0.5), &mut rng);
    let xs = random(&[5, 4], 10);
    check(&mut s, |g| {
        let x = g.input(xs.clone());
        let (w1, b1, w2, b2) = (g.param(w1), g.param(b1), g.param(w2), g.param(b2));
        let h = g.matmul(x, w1)?;
        let h = g.add_row(h, b1)?;
        let h = g.relu(h)?;
        let o = g.matmul(h, w2)?;
        let o = g.add_row(o, b2)?;
        g.cross_entropy(o, &[Some(0), Some(2), Some(1), Some(1), Some(0)])
    })
}
