use serde::{Deserialize, Serialize};

use crate::error::{shape_err, TensorError};
use crate::params::{Gradients, ParamStore};
use crate::tensor::Tensor;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self { lr: 1e-3, beta1: 0.9, beta2: 0.999, eps: 1e-8 }
    }
}

/// First and second moment estimates plus the step counter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdamState {
    pub step: u64,
    pub m: Vec<Tensor>,
    pub v: Vec<Tensor>,
}

impl AdamState {
    pub fn new(store: &ParamStore) -> Self {
        let zeros: Vec<Tensor> = store.iter().map(|(_, _, t)| Tensor::zeros(&t.shape)).collect();
        Self { step: 0, m: zeros.clone(), v: zeros }
    }
}

/// One bias-corrected Adam update with learning rate `lr`. Parameters that
/// received no gradient are left untouched.
pub fn adam_step(
    store: &mut ParamStore,
    grads: &Gradients,
    state: &mut AdamState,
    lr: f64,
    cfg: &AdamConfig,
) -> Result<(), TensorError> {
    if state.m.len() != store.len() || grads.grads.len() != store.len() {
        return Err(shape_err("adam", format!("{} params, {} grads, {} moments", store.len(), grads.grads.len(), state.m.len())));
    }
    for id in store.ids() {
        let Some(g) = grads.get(id) else { continue };
        if g.shape != store.get(id).shape || state.m[id.0].shape != g.shape {
            return Err(shape_err("adam", format!("{}: grad {:?} vs param {:?}", store.name(id), g.shape, store.get(id).shape)));
        }
    }
    state.step += 1;
    let t = state.step as i32;
    let c1 = 1.0 - cfg.beta1.powi(t);
    let c2 = 1.0 - cfg.beta2.powi(t);
    for id in store.ids().collect::<Vec<_>>() {
        let Some(g) = grads.get(id) else { continue };
        let m = &mut state.m[id.0].data;
        let v = &mut state.v[id.0].data;
        let p = &mut store.get_mut(id).data;
        for i in 0..p.len() {
            m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g.data[i];
            v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g.data[i] * g.data[i];
            let mhat = m[i] / c1;
            let vhat = v[i] / c2;
            p[i] -= lr * mhat / (vhat.sqrt() + cfg.eps);
        }
    }
    Ok(())
}

/// Linear warmup over the first `warmup_fraction` of `total_steps`, then
/// constant `base`. `step` counts from 0.
pub fn warmup_lr(base: f64, step: usize, total_steps: usize, warmup_fraction: f64) -> f64 {
    let warmup = (total_steps as f64 * warmup_fraction).ceil() as usize;
    if step < warmup {
        base * (step + 1) as f64 / warmup as f64
    } else {
        base
    }
}
