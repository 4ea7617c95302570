use std::cmp::Ordering;

/// An autoregressive model that can be fed one token at a time.
pub trait StepModel {
    type State: Clone;

    fn vocab_size(&self) -> usize;

    fn initial(&self) -> Self::State;

    /// Appends `token` to `state` and returns log-probabilities of the next
    /// token.
    fn feed(&self, state: &mut Self::State, token: usize) -> Vec<f64>;
}

#[derive(Debug, Clone, PartialEq)]
pub struct Hypothesis {
    /// Starts with the start token.
    pub ids: Vec<usize>,
    pub logprob: f64,
    pub finished: bool,
}

/// Higher log-probability first, then lexicographically smaller ids.
pub fn rank(a: &Hypothesis, b: &Hypothesis) -> Ordering {
    b.logprob.total_cmp(&a.logprob).then_with(|| a.ids.cmp(&b.ids))
}

struct Entry<S> {
    hyp: Hypothesis,
    state: Option<S>,
    next: Vec<f64>,
}

/// Beam search over at most `max_len` generated tokens. Finished
/// hypotheses stay in the pool unexpanded. Returns the surviving beam,
/// best first.
pub fn beam_search<M: StepModel>(model: &M, start: usize, end: Option<usize>, width: usize, max_len: usize) -> Vec<Hypothesis> {
    assert!(width >= 1 && max_len >= 1, "beam width and length must be positive");
    let mut state = model.initial();
    let next = model.feed(&mut state, start);
    let mut beam = vec![Entry { hyp: Hypothesis { ids: vec![start], logprob: 0.0, finished: false }, state: Some(state), next }];
    for step in 0..max_len {
        let mut pool: Vec<(Hypothesis, Option<usize>)> = Vec::new();
        for (i, e) in beam.iter().enumerate() {
            if e.hyp.finished {
                pool.push((e.hyp.clone(), None));
                continue;
            }
            for (tok, lp) in e.next.iter().enumerate() {
                let mut ids = e.hyp.ids.clone();
                ids.push(tok);
                pool.push((Hypothesis { ids, logprob: e.hyp.logprob + lp, finished: Some(tok) == end }, Some(i)));
            }
        }
        pool.sort_by(|a, b| rank(&a.0, &b.0));
        pool.truncate(width);
        let last = step + 1 == max_len;
        let mut next_beam = Vec::with_capacity(pool.len());
        for (hyp, parent) in pool {
            next_beam.push(match parent {
                Some(p) if !hyp.finished && !last => {
                    let mut state = beam[p].state.clone().expect("live parent keeps its state");
                    let next = model.feed(&mut state, *hyp.ids.last().expect("non-empty"));
                    Entry { hyp, state: Some(state), next }
                }
                _ => Entry { hyp, state: None, next: Vec::new() },
            });
        }
        beam = next_beam;
        if beam.iter().all(|e| e.hyp.finished) {
            break;
        }
    }
    beam.into_iter().map(|e| e.hyp).collect()
}

/// Argmax decoding; ties go to the lowest token id.
pub fn greedy<M: StepModel>(model: &M, start: usize, end: Option<usize>, max_len: usize) -> Hypothesis {
    let mut state = model.initial();
    let mut next = model.feed(&mut state, start);
    let mut hyp = Hypothesis { ids: vec![start], logprob: 0.0, finished: false };
    for step in 0..max_len {
        let mut best = 0;
        for (i, v) in next.iter().enumerate() {
            if *v > next[best] {
                best = i;
            }
        }
        hyp.ids.push(best);
        hyp.logprob += next[best];
        if Some(best) == end {
            hyp.finished = true;
            break;
        }
        if step + 1 < max_len {
            next = model.feed(&mut state, best);
        }
    }
    hyp
}
