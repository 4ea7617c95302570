use std::collections::BTreeMap;

use fixline_lang::{DefectLabel, FunctionTriple};
use fixline_tensor::{adam_step, grad_check, warmup_lr, AdamConfig, AdamState, GradCheckOptions, GradCheckReport, Gradients, Graph, TensorError, Var};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::classify::classify_change;
use crate::config::ModelConfig;
use crate::decoder::{cross_context, decoder_logits};
use crate::encoder::encode_pair;
use crate::error::ModelError;
use crate::input::{build_input, prepare, EncoderInput};
use crate::model::Model;
use crate::predict::{classify_pair, generate};
use crate::vocab::{Vocabulary, EOS, SOS};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub max_epochs: usize,
    pub learning_rate: f64,
    pub warmup_fraction: f64,
    pub seed: u64,
    pub w_cls: f64,
    pub w_gen: f64,
    pub min_freq: usize,
    /// Beam width used when scoring repairs during validation.
    pub val_beam_width: usize,
    pub eval_every: usize,
    /// Stop once validation label accuracy and exact match both reach
    /// these values.
    pub stop_label_accuracy: Option<f64>,
    pub stop_exact_match: Option<f64>,
    pub model: ModelConfig,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            batch_size: 32,
            max_epochs: 50,
            learning_rate: 1e-3,
            warmup_fraction: 0.05,
            seed: 0,
            w_cls: 1.0,
            w_gen: 1.0,
            min_freq: 2,
            val_beam_width: 1,
            eval_every: 1,
            stop_label_accuracy: None,
            stop_exact_match: None,
            model: ModelConfig::desk(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |m: &str| Err(ModelError::Config(m.to_string()));
        if self.batch_size == 0 || self.eval_every == 0 || self.val_beam_width == 0 {
            return bad("batch_size, eval_every and val_beam_width must be at least 1");
        }
        if self.w_cls < 0.0 || self.w_gen < 0.0 || self.w_cls + self.w_gen == 0.0 {
            return bad("loss weights must be non-negative and not both zero");
        }
        if self.learning_rate < 0.0 || !(0.0..=1.0).contains(&self.warmup_fraction) {
            return bad("learning_rate must be >= 0 and warmup_fraction in [0, 1]");
        }
        self.model.validate()
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct DatasetSplit {
    pub train: Vec<FunctionTriple>,
    pub validation: Vec<FunctionTriple>,
    pub test: Vec<FunctionTriple>,
}

/// Per-label item counts for `ratios`: floors first, then the leftover
/// units go to the training split, then by largest fractional part with
/// ties in split order.
pub fn split_counts(n: usize, ratios: [f64; 3]) -> [usize; 3] {
    let quotas = ratios.map(|r| r * n as f64);
    let mut counts = quotas.map(|q| q.floor() as usize);
    let mut left = n - counts.iter().sum::<usize>();
    let frac = |i: usize| quotas[i] - quotas[i].floor();
    let mut granted = [false; 3];
    if left > 0 && frac(0) > 0.0 {
        counts[0] += 1;
        granted[0] = true;
        left -= 1;
    }
    let mut order: Vec<usize> = (0..3).filter(|&i| !granted[i]).collect();
    order.sort_by(|&a, &b| frac(b).total_cmp(&frac(a)).then(a.cmp(&b)));
    for &i in order.iter().cycle().take(left) {
        counts[i] += 1;
    }
    counts
}

/// Splits per label so that each split keeps the label distribution.
pub fn stratified_split(dataset: &[FunctionTriple], ratios: [f64; 3], seed: u64) -> Result<DatasetSplit, ModelError> {
    if ratios.iter().any(|r| *r < 0.0 || !r.is_finite()) || (ratios.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(ModelError::RatioError(ratios.to_vec()));
    }
    let mut by_label: BTreeMap<DefectLabel, Vec<&FunctionTriple>> = BTreeMap::new();
    for t in dataset {
        by_label.entry(t.label).or_default().push(t);
    }
    let mut split = DatasetSplit::default();
    for (label, mut items) in by_label {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(label.id() as u64);
        items.shuffle(&mut rng);
        let [a, b, _] = split_counts(items.len(), ratios);
        split.train.extend(items[..a].iter().map(|t| (*t).clone()));
        split.validation.extend(items[a..a + b].iter().map(|t| (*t).clone()));
        split.test.extend(items[a + b..].iter().map(|t| (*t).clone()));
    }
    Ok(split)
}

/// A triple turned into model inputs.
#[derive(Debug, Clone)]
pub struct Example {
    pub clean: EncoderInput,
    pub current: EncoderInput,
    pub label: usize,
    /// `[SOS] fixed tokens [EOS]`.
    pub target: Vec<usize>,
    pub fixed_tokens: Vec<String>,
}

pub fn build_vocab(triples: &[FunctionTriple], min_freq: usize) -> Result<Vocabulary, ModelError> {
    let mut streams = Vec::new();
    for t in triples {
        for src in [&t.clean_src, &t.buggy_src, &t.fixed_src] {
            streams.push(prepare(src)?.tokens);
        }
    }
    Ok(Vocabulary::build(streams.iter().map(|s| s.as_slice()), min_freq))
}

pub fn make_example(model: &Model, t: &FunctionTriple) -> Result<Example, ModelError> {
    let clean = prepare(&t.clean_src)?;
    let current = prepare(&t.buggy_src)?;
    let fixed = prepare(&t.fixed_src)?;
    let max = model.config.max_decode_len;
    if fixed.tokens.len() + 1 > max {
        return Err(ModelError::TargetTooLong { len: fixed.tokens.len(), max: max - 1 });
    }
    let mut target = vec![SOS];
    target.extend(model.vocab.encode(&fixed.tokens));
    target.push(EOS);
    let v = &model.vocab;
    let l = model.config.max_len;
    Ok(Example {
        clean: build_input(&clean.tokens, &clean.dfg, v, l),
        current: build_input(&current.tokens, &current.dfg, v, l),
        label: t.label.id(),
        target,
        fixed_tokens: fixed.tokens,
    })
}

/// Label negative log-likelihood and summed target-token negative
/// log-likelihood of one example.
pub struct ExampleLosses {
    pub classification: Var,
    pub generation: Var,
    pub probs: Var,
}

pub fn example_losses(g: &mut Graph<'_>, model: &Model, ex: &Example) -> Result<ExampleLosses, ModelError> {
    let w = &model.weights;
    let (enc_clean, enc_cur) = encode_pair(g, model, &ex.clean, &ex.current)?;
    let h_clean = enc_clean.h_cls(g)?;
    let h_cur = enc_cur.h_cls(g)?;
    let cls = classify_change(g, &w.ntn, &w.fuse, &w.classes, h_clean, h_cur)?;
    let classification = g.cross_entropy(cls.logits, &[Some(ex.label)])?;
    let memory = cross_context(g, model, cls.fused, &enc_cur)?;
    let prefix = &ex.target[..ex.target.len() - 1];
    let logits = decoder_logits(g, model, memory, prefix)?;
    let gold: Vec<Option<usize>> = ex.target[1..].iter().map(|&t| Some(t)).collect();
    let generation = g.cross_entropy(logits, &gold)?;
    Ok(ExampleLosses { classification, generation, probs: cls.probs })
}

/// `w_cls * L1 / batch + w_gen * L2 / tokens` for one batch member, so
/// that summing over the batch gives the joint objective.
pub fn joint_contribution(
    g: &mut Graph<'_>,
    l: &ExampleLosses,
    w_cls: f64,
    w_gen: f64,
    batch: usize,
    tokens: usize,
) -> Result<Var, TensorError> {
    let a = g.scale(l.classification, w_cls / batch as f64)?;
    let b = g.scale(l.generation, w_gen / tokens as f64)?;
    g.add(a, b)
}

/// Joint objective of a whole batch in one graph.
pub fn batch_objective(g: &mut Graph<'_>, model: &Model, batch: &[Example], w_cls: f64, w_gen: f64) -> Result<Var, ModelError> {
    let tokens: usize = batch.iter().map(|e| e.target.len() - 1).sum();
    let mut total: Option<Var> = None;
    for ex in batch {
        let l = example_losses(g, model, ex)?;
        let c = joint_contribution(g, &l, w_cls, w_gen, batch.len(), tokens)?;
        total = Some(match total {
            Some(t) => g.add(t, c)?,
            None => c,
        });
    }
    total.ok_or(ModelError::EmptySplit("batch"))
}

/// Finite-difference check of the joint objective's gradient with respect
/// to every model parameter. Runs in evaluation mode, so dropout is off.
pub fn joint_grad_check(
    model: &mut Model,
    batch: &[Example],
    w_cls: f64,
    w_gen: f64,
    opts: &GradCheckOptions,
) -> Result<GradCheckReport, ModelError> {
    let mut store = std::mem::take(&mut model.params);
    let mut failure = None;
    let shared: &Model = model;
    let report = grad_check(
        &mut store,
        |g| {
            batch_objective(g, shared, batch, w_cls, w_gen).map_err(|e| match e {
                ModelError::Tensor(t) => t,
                other => {
                    let detail = other.to_string();
                    failure = Some(other);
                    TensorError::ShapeMismatch { op: "model", detail }
                }
            })
        },
        opts,
    );
    model.params = store;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(report?)
}

pub fn joint_loss(l1: f64, l2: f64, w_cls: f64, w_gen: f64) -> f64 {
    w_cls * l1 + w_gen * l2
}

/// One line of the training log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub l1: f64,
    pub l2: f64,
    pub l3: f64,
    pub val_macro_f1: Option<f64>,
    pub val_label_accuracy: Option<f64>,
    pub val_exact_match: Option<f64>,
    pub val_score: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub macro_f1: f64,
    pub label_accuracy: f64,
    /// Over examples whose gold label is not clean; 0 when there are none.
    pub exact_match: f64,
}

pub fn evaluate(model: &Model, examples: &[Example], beam_width: usize) -> Result<Evaluation, ModelError> {
    let mut pred = Vec::new();
    let mut gold = Vec::new();
    let (mut hits, mut defective) = (0, 0);
    for ex in examples {
        let (probs, memory) = classify_pair(model, &ex.clean, &ex.current)?;
        pred.push(crate::classify::argmax(&probs));
        gold.push(ex.label);
        if ex.label != DefectLabel::Clean.id() {
            defective += 1;
            let (tokens, _) = generate(model, &memory, beam_width);
            hits += (tokens == ex.fixed_tokens) as usize;
        }
    }
    let macro_f1 = fixline_metrics::macro_prf(&pred, &gold)?.f1;
    let correct = pred.iter().zip(&gold).filter(|(a, b)| a == b).count();
    Ok(Evaluation {
        macro_f1,
        label_accuracy: correct as f64 / examples.len().max(1) as f64,
        exact_match: if defective == 0 { 0.0 } else { hits as f64 / defective as f64 },
    })
}

pub struct TrainOutcome {
    /// Weights from the epoch with the best validation score.
    pub model: Model,
    pub best_epoch: usize,
    pub best_score: f64,
    pub log: Vec<EpochRecord>,
}

fn finite(v: f64, epoch: usize, batch: usize, what: &str) -> Result<(), ModelError> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(ModelError::NonFiniteLoss { epoch, batch, detail: format!("{what} = {v}") })
    }
}

/// Joint training with per-epoch validation and best-epoch selection. When
/// the validation split is empty the training split is scored instead.
pub fn train_model(cfg: &TrainConfig, split: &DatasetSplit, mut on_epoch: impl FnMut(&EpochRecord)) -> Result<TrainOutcome, ModelError> {
    cfg.validate()?;
    if split.train.is_empty() {
        return Err(ModelError::EmptySplit("train"));
    }
    let vocab = build_vocab(&split.train, cfg.min_freq)?;
    let mut model = Model::new(cfg.model.clone(), vocab, cfg.seed)?;
    let train: Vec<Example> = split.train.iter().map(|t| make_example(&model, t)).collect::<Result<_, _>>()?;
    let val: Vec<Example> = if split.validation.is_empty() {
        log::warn!("validation split is empty; selecting on the training split");
        train.clone()
    } else {
        split.validation.iter().map(|t| make_example(&model, t)).collect::<Result<_, _>>()?
    };

    let adam = AdamConfig { lr: cfg.learning_rate, ..AdamConfig::default() };
    let mut state = AdamState::new(&model.params);
    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut shuffle_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let batches_per_epoch = train.len().div_ceil(cfg.batch_size);
    let total_steps = batches_per_epoch * cfg.max_epochs;
    let mut step = 0usize;
    let mut best: Option<(f64, usize, fixline_tensor::ParamStore)> = None;
    let mut log_records = Vec::new();

    for epoch in 1..=cfg.max_epochs {
        order.shuffle(&mut shuffle_rng);
        let (mut l1_sum, mut l2_sum, mut tok_sum) = (0.0, 0.0, 0usize);
        for (bi, batch) in order.chunks(cfg.batch_size).enumerate() {
            let tokens: usize = batch.iter().map(|&i| train[i].target.len() - 1).sum();
            let mut grads = Gradients::zeros_like(&model.params);
            for (k, &i) in batch.iter().enumerate() {
                let mut g = if cfg.model.dropout > 0.0 {
                    Graph::training(&model.params, cfg.seed ^ ((step as u64) << 20) ^ k as u64)
                } else {
                    Graph::new(&model.params)
                };
                let losses = example_losses(&mut g, &model, &train[i])?;
                let l1 = g.value(losses.classification).item();
                let l2 = g.value(losses.generation).item();
                finite(l1, epoch, bi, "classification loss")?;
                finite(l2, epoch, bi, "generation loss")?;
                l1_sum += l1;
                l2_sum += l2;
                let loss = joint_contribution(&mut g, &losses, cfg.w_cls, cfg.w_gen, batch.len(), tokens)?;
                grads.accumulate(&g.backward(loss)?);
            }
            tok_sum += tokens;
            finite(grads.global_norm(), epoch, bi, "gradient norm")?;
            let lr = warmup_lr(cfg.learning_rate, step, total_steps, cfg.warmup_fraction);
            adam_step(&mut model.params, &grads, &mut state, lr, &adam)?;
            step += 1;
        }
        let l1 = l1_sum / train.len() as f64;
        let l2 = l2_sum / tok_sum as f64;
        let mut rec = EpochRecord {
            epoch,
            l1,
            l2,
            l3: joint_loss(l1, l2, cfg.w_cls, cfg.w_gen),
            val_macro_f1: None,
            val_label_accuracy: None,
            val_exact_match: None,
            val_score: None,
        };
        let mut stop = false;
        if epoch % cfg.eval_every == 0 || epoch == cfg.max_epochs {
            let ev = evaluate(&model, &val, cfg.val_beam_width)?;
            let score = ev.macro_f1 + ev.exact_match;
            rec.val_macro_f1 = Some(ev.macro_f1);
            rec.val_label_accuracy = Some(ev.label_accuracy);
            rec.val_exact_match = Some(ev.exact_match);
            rec.val_score = Some(score);
            if best.as_ref().is_none_or(|b| score > b.0) {
                best = Some((score, epoch, model.params.clone()));
            }
            stop = match (cfg.stop_label_accuracy, cfg.stop_exact_match) {
                (None, None) => false,
                (a, e) => ev.label_accuracy >= a.unwrap_or(0.0) && ev.exact_match >= e.unwrap_or(0.0),
            };
        }
        on_epoch(&rec);
        log_records.push(rec);
        if stop {
            break;
        }
    }
    let (best_score, best_epoch, params) = best.expect("the last epoch is always evaluated unless stopped after an evaluation");
    model.params = params;
    Ok(TrainOutcome { model, best_epoch, best_score, log: log_records })
}
