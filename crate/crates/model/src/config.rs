use serde::{Deserialize, Serialize};

use crate::error::ModelError;

/// Architecture hyperparameters. Stored verbatim in checkpoints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub d_model: usize,
    pub encoder_layers: usize,
    pub decoder_layers: usize,
    pub heads: usize,
    pub d_ff: usize,
    /// Encoder input length including [CLS] and [SEP].
    pub max_len: usize,
    /// Decoder positions, counting [SOS].
    pub max_decode_len: usize,
    pub ntn_slices: usize,
    /// Width of the fused vector `e`; projected to `d_model` for the decoder
    /// when different.
    pub fused_dim: usize,
    pub dropout: f64,
    pub init_range: f64,
}

impl ModelConfig {
    pub fn desk() -> Self {
        Self {
            d_model: 64,
            encoder_layers: 4,
            decoder_layers: 4,
            heads: 4,
            d_ff: 256,
            max_len: 256,
            max_decode_len: 256,
            ntn_slices: 8,
            fused_dim: 64,
            dropout: 0.1,
            init_range: 0.1,
        }
    }

    pub fn full() -> Self {
        Self {
            d_model: 768,
            encoder_layers: 12,
            decoder_layers: 12,
            heads: 12,
            d_ff: 3072,
            max_len: 512,
            max_decode_len: 256,
            fused_dim: 768,
            init_range: fixline_tensor::DEFAULT_INIT_RANGE,
            ..Self::desk()
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |m: String| Err(ModelError::Config(m));
        if self.d_model == 0 || self.heads == 0 || !self.d_model.is_multiple_of(self.heads) {
            return bad(format!("d_model {} must be a positive multiple of heads {}", self.d_model, self.heads));
        }
        if self.max_len < 3 {
            return bad(format!("max_len {} leaves no room for specials", self.max_len));
        }
        if self.max_decode_len < 2 || self.ntn_slices == 0 || self.fused_dim == 0 || self.d_ff == 0 {
            return bad("max_decode_len >= 2 and positive ntn_slices, fused_dim, d_ff required".into());
        }
        if !(self.init_range > 0.0 && self.init_range.is_finite()) {
            return bad(format!("init_range {} must be positive", self.init_range));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return bad(format!("dropout {} outside [0, 1)", self.dropout));
        }
        Ok(())
    }
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self::desk()
    }
}
