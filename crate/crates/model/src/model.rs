use fixline_lang::NUM_LABELS;
use fixline_tensor::{init_rng, Checkpoint, Init, ParamId, ParamStore, TensorError};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::ModelConfig;
use crate::error::ModelError;
use crate::vocab::Vocabulary;

pub const CHECKPOINT_KIND: &str = "fixline-model";

#[derive(Debug, Clone, Copy)]
pub struct Linear {
    pub w: ParamId,
    pub b: Option<ParamId>,
}

#[derive(Debug, Clone, Copy)]
pub struct Norm {
    pub gamma: ParamId,
    pub beta: ParamId,
}

#[derive(Debug, Clone, Copy)]
pub struct AttentionWeights {
    pub q: Linear,
    pub k: Linear,
    pub v: Linear,
    pub o: Linear,
}

#[derive(Debug, Clone, Copy)]
pub struct FeedForward {
    pub inner: Linear,
    pub outer: Linear,
}

#[derive(Debug, Clone, Copy)]
pub struct EncoderLayer {
    pub attn: AttentionWeights,
    pub norm1: Norm,
    pub ffn: FeedForward,
    pub norm2: Norm,
}

#[derive(Debug, Clone, Copy)]
pub struct DecoderLayer {
    pub self_attn: AttentionWeights,
    pub norm1: Norm,
    pub cross_attn: AttentionWeights,
    pub norm2: Norm,
    pub ffn: FeedForward,
    pub norm3: Norm,
}

#[derive(Debug, Clone, Copy)]
pub struct NtnWeights {
    /// `d x (slices * d)`; slice `k` occupies columns `k*d..(k+1)*d`.
    pub gamma: ParamId,
    pub bias: ParamId,
}

#[derive(Debug, Clone)]
pub struct Weights {
    pub enc_tokens: ParamId,
    pub enc_positions: ParamId,
    pub enc_norm: Norm,
    pub encoder: Vec<EncoderLayer>,
    pub ntn: NtnWeights,
    pub fuse: Linear,
    pub classes: Linear,
    pub fused_proj: Option<Linear>,
    pub dec_tokens: ParamId,
    pub dec_positions: ParamId,
    pub dec_norm: Norm,
    pub decoder: Vec<DecoderLayer>,
    pub head: Linear,
    pub out: Linear,
}

/// Either creates parameters or resolves them in a loaded store.
enum Registrar<'a> {
    Init(&'a mut ParamStore, Box<ChaCha8Rng>, f64),
    Load(&'a ParamStore),
}

impl Registrar<'_> {
    fn param(&mut self, name: &str, shape: &[usize], init: Init) -> Result<ParamId, ModelError> {
        match self {
            Registrar::Init(store, rng, range) => {
                let init = if let Init::Uniform(_) = init { Init::Uniform(*range) } else { init };
                Ok(store.add_init(name, shape, init, rng))
            }
            Registrar::Load(store) => {
                let id = store.id(name)?;
                if store.get(id).shape != shape {
                    return Err(TensorError::ShapeMismatch {
                        op: "checkpoint",
                        detail: format!("{name}: stored {:?}, expected {shape:?}", store.get(id).shape),
                    }
                    .into());
                }
                Ok(id)
            }
        }
    }

    fn linear(&mut self, name: &str, inp: usize, out: usize) -> Result<Linear, ModelError> {
        Ok(Linear {
            w: self.param(&format!("{name}.weight"), &[inp, out], Init::Uniform(0.0))?,
            b: Some(self.param(&format!("{name}.bias"), &[out], Init::Zeros)?),
        })
    }

    fn projection(&mut self, name: &str, inp: usize, out: usize) -> Result<Linear, ModelError> {
        Ok(Linear { w: self.param(&format!("{name}.weight"), &[inp, out], Init::Uniform(0.0))?, b: None })
    }

    fn norm(&mut self, name: &str, d: usize) -> Result<Norm, ModelError> {
        Ok(Norm {
            gamma: self.param(&format!("{name}.gamma"), &[d], Init::Ones)?,
            beta: self.param(&format!("{name}.beta"), &[d], Init::Zeros)?,
        })
    }

    fn attention(&mut self, name: &str, d: usize) -> Result<AttentionWeights, ModelError> {
        Ok(AttentionWeights {
            q: self.linear(&format!("{name}.q"), d, d)?,
            k: self.projection(&format!("{name}.k"), d, d)?,
            v: self.linear(&format!("{name}.v"), d, d)?,
            o: self.linear(&format!("{name}.o"), d, d)?,
        })
    }

    fn ffn(&mut self, name: &str, d: usize, ff: usize) -> Result<FeedForward, ModelError> {
        Ok(FeedForward { inner: self.linear(&format!("{name}.inner"), d, ff)?, outer: self.linear(&format!("{name}.outer"), ff, d)? })
    }
}

fn register(cfg: &ModelConfig, vocab_size: usize, r: &mut Registrar<'_>) -> Result<Weights, ModelError> {
    let d = cfg.d_model;
    let u = Init::Uniform(0.0);
    let enc_tokens = r.param("encoder.tokens", &[vocab_size, d], u)?;
    let enc_positions = r.param("encoder.positions", &[cfg.max_len + 2, d], u)?;
    let enc_norm = r.norm("encoder.embed_norm", d)?;
    let mut encoder = Vec::new();
    for l in 0..cfg.encoder_layers {
        let p = format!("encoder.layer{l}");
        encoder.push(EncoderLayer {
            attn: r.attention(&format!("{p}.attn"), d)?,
            norm1: r.norm(&format!("{p}.norm1"), d)?,
            ffn: r.ffn(&format!("{p}.ffn"), d, cfg.d_ff)?,
            norm2: r.norm(&format!("{p}.norm2"), d)?,
        });
    }
    let n = cfg.ntn_slices;
    let ntn = NtnWeights { gamma: r.param("classify.ntn.gamma", &[d, n * d], u)?, bias: r.param("classify.ntn.bias", &[n], Init::Zeros)? };
    let fuse = r.linear("classify.fuse", n + 2 * d, cfg.fused_dim)?;
    let classes = r.linear("classify.out", cfg.fused_dim, NUM_LABELS)?;
    let fused_proj = if cfg.fused_dim != d { Some(r.linear("decoder.fused_proj", cfg.fused_dim, d)?) } else { None };
    let dec_tokens = r.param("decoder.tokens", &[vocab_size, d], u)?;
    let dec_positions = r.param("decoder.positions", &[cfg.max_decode_len, d], u)?;
    let dec_norm = r.norm("decoder.embed_norm", d)?;
    let mut decoder = Vec::new();
    for l in 0..cfg.decoder_layers {
        let p = format!("decoder.layer{l}");
        decoder.push(DecoderLayer {
            self_attn: r.attention(&format!("{p}.self_attn"), d)?,
            norm1: r.norm(&format!("{p}.norm1"), d)?,
            cross_attn: r.attention(&format!("{p}.cross_attn"), d)?,
            norm2: r.norm(&format!("{p}.norm2"), d)?,
            ffn: r.ffn(&format!("{p}.ffn"), d, cfg.d_ff)?,
            norm3: r.norm(&format!("{p}.norm3"), d)?,
        });
    }
    let head = r.linear("decoder.head", d, d)?;
    let out = r.linear("decoder.out", d, vocab_size)?;
    Ok(Weights {
        enc_tokens,
        enc_positions,
        enc_norm,
        encoder,
        ntn,
        fuse,
        classes,
        fused_proj,
        dec_tokens,
        dec_positions,
        dec_norm,
        decoder,
        head,
        out,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct CheckpointConfig {
    kind: String,
    model: ModelConfig,
}

/// Configuration, vocabulary and weights of the joint model.
#[derive(Debug, Clone)]
pub struct Model {
    pub config: ModelConfig,
    pub vocab: Vocabulary,
    pub params: ParamStore,
    pub weights: Weights,
}

impl Model {
    /// Fresh model: weights uniform in `(-init_range, init_range)`, biases
    /// and layer-norm shifts zero, layer-norm gains one.
    pub fn new(config: ModelConfig, vocab: Vocabulary, seed: u64) -> Result<Self, ModelError> {
        config.validate()?;
        let mut params = ParamStore::new();
        let weights = register(&config, vocab.len(), &mut Registrar::Init(&mut params, Box::new(init_rng(seed)), config.init_range))?;
        Ok(Self { config, vocab, params, weights })
    }

    pub fn to_checkpoint(&self) -> Checkpoint {
        let cfg = CheckpointConfig { kind: CHECKPOINT_KIND.into(), model: self.config.clone() };
        Checkpoint {
            config: serde_json::to_value(cfg).expect("config serializes"),
            vocab: self.vocab.tokens().to_vec(),
            params: self.params.clone(),
        }
    }

    pub fn from_checkpoint(ck: Checkpoint) -> Result<Self, ModelError> {
        let cfg: CheckpointConfig =
            serde_json::from_value(ck.config).map_err(|e| ModelError::Config(format!("checkpoint configuration: {e}")))?;
        if cfg.kind != CHECKPOINT_KIND {
            return Err(ModelError::Config(format!("checkpoint kind {:?}", cfg.kind)));
        }
        cfg.model.validate()?;
        let vocab = Vocabulary::from_tokens(ck.vocab.iter().skip(crate::vocab::SPECIALS.len()).cloned());
        if vocab.tokens() != ck.vocab.as_slice() {
            return Err(ModelError::Config("checkpoint vocabulary is not well formed".into()));
        }
        let weights = register(&cfg.model, vocab.len(), &mut Registrar::Load(&ck.params))?;
        if ck.params.len() != count_params(&cfg.model) {
            return Err(ModelError::Config(format!("checkpoint holds {} tensors, expected {}", ck.params.len(), count_params(&cfg.model))));
        }
        Ok(Self { config: cfg.model, vocab, params: ck.params, weights })
    }
}

fn count_params(cfg: &ModelConfig) -> usize {
    // embeddings 2+2, norms 2+2, ntn 2, fuse 2, classes 2, head 2, out 2
    let fixed = 18 + if cfg.fused_dim != cfg.d_model { 2 } else { 0 };
    fixed + cfg.encoder_layers * 15 + cfg.decoder_layers * 24
}
