use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::TensorError;
use crate::graph::{Graph, Var};
use crate::params::ParamStore;

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckOptions {
    /// Central-difference step.
    pub eps: f64,
    /// Check at most this many coordinates per parameter, sampled.
    pub max_coords: Option<usize>,
    pub seed: u64,
}

impl Default for GradCheckOptions {
    fn default() -> Self {
        Self { eps: 1e-5, max_coords: None, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    pub max_rel_error: f64,
    /// `name[index]` of the worst coordinate.
    pub worst_parameter: String,
    pub coordinates: usize,
}

pub fn rel_error(a: f64, n: f64) -> f64 {
    (a - n).abs() / a.abs().max(n.abs()).max(1e-8)
}

fn eval<F>(store: &ParamStore, f: &mut F) -> Result<(f64, usize), TensorError>
where
    F: FnMut(&mut Graph<'_>) -> Result<Var, TensorError>,
{
    let mut g = Graph::new(store);
    let loss = f(&mut g)?;
    Ok((g.value(loss).item(), g.stochastic_ops()))
}

/// Compares backpropagated gradients of the scalar built by `f` with
/// central finite differences over the parameters in `store`.
pub fn grad_check<F>(store: &mut ParamStore, mut f: F, opts: &GradCheckOptions) -> Result<GradCheckReport, TensorError>
where
    F: FnMut(&mut Graph<'_>) -> Result<Var, TensorError>,
{
    let analytic = {
        let mut g = Graph::new(store);
        let loss = f(&mut g)?;
        if g.stochastic_ops() > 0 {
            return Err(TensorError::DropoutActive);
        }
        g.backward(loss)?
    };
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut report = GradCheckReport { max_rel_error: 0.0, worst_parameter: String::new(), coordinates: 0 };
    for id in store.ids().collect::<Vec<_>>() {
        let n = store.get(id).len();
        let coords: Vec<usize> = match opts.max_coords {
            Some(k) if k < n => {
                let mut c = sample(&mut rng, n, k).into_vec();
                c.sort_unstable();
                c
            }
            _ => (0..n).collect(),
        };
        for i in coords {
            let a = analytic.get(id).map_or(0.0, |t| t.data[i]);
            let orig = store.get(id).data[i];
            store.get_mut(id).data[i] = orig + opts.eps;
            let (plus, _) = eval(store, &mut f)?;
            store.get_mut(id).data[i] = orig - opts.eps;
            let (minus, _) = eval(store, &mut f)?;
            store.get_mut(id).data[i] = orig;
            let numeric = (plus - minus) / (2.0 * opts.eps);
            let err = rel_error(a, numeric);
            report.coordinates += 1;
            if err > report.max_rel_error || report.worst_parameter.is_empty() {
                report.max_rel_error = err;
                report.worst_parameter = format!("{}[{i}]", store.name(id));
            }
        }
    }
    Ok(report)
}
