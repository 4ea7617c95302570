//! A seeded toy step model and exhaustive enumeration of its outputs.

use fixline_model::beam::rank;
use fixline_model::{beam_search, greedy, Hypothesis, StepModel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Next-token distribution is a seeded function of the whole prefix.
pub struct Table {
    pub vocab: usize,
    pub seed: u64,
}

impl StepModel for Table {
    type State = Vec<usize>;

    fn vocab_size(&self) -> usize {
        self.vocab
    }

    fn initial(&self) -> Vec<usize> {
        Vec::new()
    }

    fn feed(&self, state: &mut Vec<usize>, token: usize) -> Vec<f64> {
        state.push(token);
        let key = state.iter().fold(self.seed, |h, &t| h.wrapping_mul(1_000_003).wrapping_add(t as u64 + 1));
        let mut rng = ChaCha8Rng::seed_from_u64(key);
        let w: Vec<f64> = (0..self.vocab).map(|_| rng.gen_range(0.05..1.0)).collect();
        let z: f64 = w.iter().sum();
        w.iter().map(|x| (x / z).ln()).collect()
    }
}

pub fn score(m: &Table, ids: &[usize]) -> f64 {
    let mut s = m.initial();
    let mut lp = 0.0;
    let mut next = m.feed(&mut s, ids[0]);
    for (i, &t) in ids[1..].iter().enumerate() {
        lp += next[t];
        if i + 2 < ids.len() {
            next = m.feed(&mut s, t);
        }
    }
    lp
}

/// Every sequence a beam could produce: stops at `end` or after `max_len`
/// generated tokens.
pub fn enumerate(m: &Table, start: usize, end: Option<usize>, max_len: usize) -> Vec<Hypothesis> {
    let mut out = Vec::new();
    let mut live = vec![vec![start]];
    for step in 0..max_len {
        let mut next_live = Vec::new();
        for ids in &live {
            for t in 0..m.vocab {
                let mut ids = ids.clone();
                ids.push(t);
                if Some(t) == end || step + 1 == max_len {
                    out.push(ids);
                } else {
                    next_live.push(ids);
                }
            }
        }
        live = next_live;
    }
    let mut hyps: Vec<Hypothesis> = out
        .into_iter()
        .map(|ids| {
            let finished = end.is_some() && ids.last() == end.as_ref();
            Hypothesis { logprob: score(m, &ids), ids, finished }
        })
        .collect();
    hyps.sort_by(rank);
    hyps
}

pub fn same(a: &[Hypothesis], b: &[Hypothesis]) -> Result<(), String> {
    if a.len() != b.len() {
        return Err(format!("{} hypotheses vs {}", a.len(), b.len()));
    }
    for (i, (x, y)) in a.iter().zip(b).enumerate() {
        if x.ids != y.ids || x.finished != y.finished || (x.logprob - y.logprob).abs() >= 1e-12 {
            return Err(format!("rank {i}: {x:?} vs {y:?}"));
        }
    }
    Ok(())
}

/// Width 27 over 3 tokens and 3 steps against the 27 enumerated sequences,
/// with and without an end token.
pub fn full_width(seeds: std::ops::Range<u64>) -> Result<(), String> {
    for seed in seeds {
        let m = Table { vocab: 3, seed };
        for (end, count) in [(None, 27), (Some(2), 15)] {
            let beam = beam_search(&m, 0, end, 27, 3);
            let all = enumerate(&m, 0, end, 3);
            if all.len() != count {
                return Err(format!("enumerated {} sequences, expected {count}", all.len()));
            }
            same(&beam, &all).map_err(|e| format!("seed {seed} end {end:?}: {e}"))?;
        }
    }
    Ok(())
}

pub fn width_one_is_greedy(seeds: std::ops::Range<u64>) -> Result<(), String> {
    for seed in seeds {
        for (vocab, len) in [(3, 3), (5, 6)] {
            let m = Table { vocab, seed };
            for end in [None, Some(vocab - 1)] {
                let g = greedy(&m, 0, end, len);
                let b = beam_search(&m, 0, end, 1, len);
                same(&b, &[g]).map_err(|e| format!("seed {seed} vocab {vocab} end {end:?}: {e}"))?;
            }
        }
    }
    Ok(())
}
