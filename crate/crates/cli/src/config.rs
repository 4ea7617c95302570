use std::path::{Path, PathBuf};

use fixline_lang::SynthSpec;
use fixline_model::{ModelConfig, TrainConfig};
use fixline_tensor::Dtype;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path} is not valid TOML: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("unknown configuration key `{key}`; the nearest valid key is `{nearest}`")]
    UnknownKey { key: String, nearest: String },
    #[error("override `{0}` is not of the form key=value")]
    BadOverride(String),
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitName {
    Train,
    Validation,
    Test,
    All,
}

/// Every tunable value, as one flat table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Settings {
    pub seed: u64,
    pub beam_width: usize,

    pub batch_size: usize,
    pub max_epochs: usize,
    pub learning_rate: f64,
    pub warmup_fraction: f64,
    pub w_cls: f64,
    pub w_gen: f64,
    pub min_freq: usize,
    pub val_beam_width: usize,
    pub eval_every: usize,
    pub stop_label_accuracy: Option<f64>,
    pub stop_exact_match: Option<f64>,

    pub d_model: usize,
    pub encoder_layers: usize,
    pub decoder_layers: usize,
    pub heads: usize,
    pub d_ff: usize,
    pub max_len: usize,
    pub max_decode_len: usize,
    pub ntn_slices: usize,
    pub fused_dim: usize,
    pub dropout: f64,
    pub init_range: f64,

    pub split_train: f64,
    pub split_validation: f64,
    pub split_test: f64,
    /// Which split `eval` scores.
    pub eval_split: SplitName,
    pub checkpoint_dtype: Dtype,

    pub synth_count_per_label: usize,
    pub synth_clean_fraction: f64,
}

pub const KEYS: &[&str] = &[
    "seed",
    "beam_width",
    "batch_size",
    "max_epochs",
    "learning_rate",
    "warmup_fraction",
    "w_cls",
    "w_gen",
    "min_freq",
    "val_beam_width",
    "eval_every",
    "stop_label_accuracy",
    "stop_exact_match",
    "d_model",
    "encoder_layers",
    "decoder_layers",
    "heads",
    "d_ff",
    "max_len",
    "max_decode_len",
    "ntn_slices",
    "fused_dim",
    "dropout",
    "init_range",
    "split_train",
    "split_validation",
    "split_test",
    "eval_split",
    "checkpoint_dtype",
    "synth_count_per_label",
    "synth_clean_fraction",
];

impl Default for Settings {
    fn default() -> Self {
        let t = TrainConfig::default();
        let m = t.model.clone();
        let s = SynthSpec::default();
        Self {
            seed: t.seed,
            beam_width: 10,
            batch_size: t.batch_size,
            max_epochs: t.max_epochs,
            learning_rate: t.learning_rate,
            warmup_fraction: t.warmup_fraction,
            w_cls: t.w_cls,
            w_gen: t.w_gen,
            min_freq: t.min_freq,
            val_beam_width: t.val_beam_width,
            eval_every: t.eval_every,
            stop_label_accuracy: t.stop_label_accuracy,
            stop_exact_match: t.stop_exact_match,
            d_model: m.d_model,
            encoder_layers: m.encoder_layers,
            decoder_layers: m.decoder_layers,
            heads: m.heads,
            d_ff: m.d_ff,
            max_len: m.max_len,
            max_decode_len: m.max_decode_len,
            ntn_slices: m.ntn_slices,
            fused_dim: m.fused_dim,
            dropout: m.dropout,
            init_range: m.init_range,
            split_train: 0.8,
            split_validation: 0.1,
            split_test: 0.1,
            eval_split: SplitName::Test,
            checkpoint_dtype: Dtype::F64,
            synth_count_per_label: s.count_per_label,
            synth_clean_fraction: s.clean_fraction,
        }
    }
}

impl Settings {
    pub fn model_config(&self) -> ModelConfig {
        ModelConfig {
            d_model: self.d_model,
            encoder_layers: self.encoder_layers,
            decoder_layers: self.decoder_layers,
            heads: self.heads,
            d_ff: self.d_ff,
            max_len: self.max_len,
            max_decode_len: self.max_decode_len,
            ntn_slices: self.ntn_slices,
            fused_dim: self.fused_dim,
            dropout: self.dropout,
            init_range: self.init_range,
        }
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            batch_size: self.batch_size,
            max_epochs: self.max_epochs,
            learning_rate: self.learning_rate,
            warmup_fraction: self.warmup_fraction,
            seed: self.seed,
            w_cls: self.w_cls,
            w_gen: self.w_gen,
            min_freq: self.min_freq,
            val_beam_width: self.val_beam_width,
            eval_every: self.eval_every,
            stop_label_accuracy: self.stop_label_accuracy,
            stop_exact_match: self.stop_exact_match,
            model: self.model_config(),
        }
    }

    pub fn synth_spec(&self) -> SynthSpec {
        SynthSpec {
            seed: self.seed,
            count_per_label: self.synth_count_per_label,
            clean_fraction: self.synth_clean_fraction,
            ..SynthSpec::default()
        }
    }

    pub fn ratios(&self) -> [f64; 3] {
        [self.split_train, self.split_validation, self.split_test]
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.beam_width == 0 {
            return Err(ConfigError::Invalid("beam_width must be at least 1".into()));
        }
        let r = self.ratios();
        if r.iter().any(|x| *x < 0.0 || !x.is_finite()) || (r.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(ConfigError::Invalid(format!("split ratios must be non-negative and sum to 1, got {r:?}")));
        }
        if !(0.0..1.0).contains(&self.synth_clean_fraction) {
            return Err(ConfigError::Invalid("synth_clean_fraction must be in [0, 1)".into()));
        }
        self.train_config().validate().map_err(|e| ConfigError::Invalid(e.to_string()))
    }

    /// The settings as a TOML document that `load_config` reads back.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("settings serialize")
    }
}

fn nearest(key: &str) -> String {
    KEYS.iter().min_by_key(|k| strsim::levenshtein(key, k)).expect("keys are non-empty").to_string()
}

fn check_key(key: &str) -> Result<(), ConfigError> {
    if KEYS.contains(&key) {
        Ok(())
    } else {
        Err(ConfigError::UnknownKey { key: key.to_string(), nearest: nearest(key) })
    }
}

/// Parses `value` as a TOML value, falling back to a bare string.
fn parse_value(value: &str) -> toml::Value {
    toml::from_str::<toml::Table>(&format!("v = {value}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(value.to_string()))
}

/// Defaults, then the file at `path`, then `key=value` overrides.
pub fn load_config(path: Option<&Path>, overrides: &[String]) -> Result<Settings, ConfigError> {
    let mut table = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|source| ConfigError::Io { path: p.to_path_buf(), source })?;
            toml::from_str::<toml::Table>(&text).map_err(|e| ConfigError::Parse { path: p.to_path_buf(), message: e.to_string() })?
        }
        None => toml::Table::new(),
    };
    for key in table.keys() {
        check_key(key)?;
    }
    for o in overrides {
        let (k, v) = o.split_once('=').ok_or_else(|| ConfigError::BadOverride(o.clone()))?;
        let k = k.trim();
        check_key(k)?;
        table.insert(k.to_string(), parse_value(v.trim()));
    }
    let settings: Settings = toml::Value::Table(table).try_into().map_err(|e: toml::de::Error| ConfigError::Invalid(e.to_string()))?;
    settings.validate()?;
    Ok(settings)
}
