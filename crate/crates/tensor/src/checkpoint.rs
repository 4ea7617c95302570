//! Binary checkpoint container.
//!
//! Layout: magic `FXCK`, `u32` container version, `u64` header length, a
//! JSON header, then the tensors' raw little-endian data in header order.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::CheckpointError;
use crate::params::ParamStore;
use crate::tensor::Tensor;

const MAGIC: &[u8; 4] = b"FXCK";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dtype {
    #[default]
    F64,
    F32,
}

impl Dtype {
    fn width(self) -> usize {
        match self {
            Dtype::F64 => 8,
            Dtype::F32 => 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct TensorEntry {
    name: String,
    shape: Vec<usize>,
    dtype: Dtype,
    offset: usize,
    len: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Header {
    format_version: u32,
    config: serde_json::Value,
    vocab: Vec<String>,
    tensors: Vec<TensorEntry>,
}

/// Model configuration, vocabulary and named parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub config: serde_json::Value,
    pub vocab: Vec<String>,
    pub params: ParamStore,
}

impl Checkpoint {
    pub fn to_bytes(&self, dtype: Dtype) -> Vec<u8> {
        let mut tensors = Vec::new();
        let mut offset = 0;
        for (_, name, t) in self.params.iter() {
            let len = t.len() * dtype.width();
            tensors.push(TensorEntry { name: name.to_string(), shape: t.shape.clone(), dtype, offset, len });
            offset += len;
        }
        let header = Header { format_version: FORMAT_VERSION, config: self.config.clone(), vocab: self.vocab.clone(), tensors };
        let header = serde_json::to_vec(&header).expect("header serializes");
        let mut out = Vec::with_capacity(16 + header.len() + offset);
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        out.extend_from_slice(&(header.len() as u64).to_le_bytes());
        out.extend_from_slice(&header);
        for (_, _, t) in self.params.iter() {
            for x in &t.data {
                match dtype {
                    Dtype::F64 => out.extend_from_slice(&x.to_le_bytes()),
                    Dtype::F32 => out.extend_from_slice(&(*x as f32).to_le_bytes()),
                }
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, CheckpointError> {
        let fmt = |m: &str| CheckpointError::Format(m.to_string());
        if bytes.len() < 16 || &bytes[..4] != MAGIC {
            return Err(fmt("bad magic"));
        }
        let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
        if version != FORMAT_VERSION {
            return Err(CheckpointError::Version(version));
        }
        let hlen = u64::from_le_bytes(bytes[8..16].try_into().unwrap()) as usize;
        let body = 16usize.checked_add(hlen).filter(|&e| e <= bytes.len()).ok_or_else(|| fmt("truncated header"))?;
        let header: Header = serde_json::from_slice(&bytes[16..body]).map_err(|e| CheckpointError::Format(e.to_string()))?;
        if header.format_version != FORMAT_VERSION {
            return Err(CheckpointError::Version(header.format_version));
        }
        let data = &bytes[body..];
        let mut params = ParamStore::new();
        for e in &header.tensors {
            let n: usize = e.shape.iter().product();
            if e.len != n * e.dtype.width() || e.offset.checked_add(e.len).is_none_or(|end| end > data.len()) {
                return Err(CheckpointError::Format(format!("tensor {} out of bounds", e.name)));
            }
            if params.id(&e.name).is_ok() {
                return Err(CheckpointError::Format(format!("duplicate tensor {}", e.name)));
            }
            let raw = &data[e.offset..e.offset + e.len];
            let values = match e.dtype {
                Dtype::F64 => raw.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect(),
                Dtype::F32 => raw.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64).collect(),
            };
            params.add(&e.name, Tensor::new(e.shape.clone(), values)?);
        }
        Ok(Self { config: header.config, vocab: header.vocab, params })
    }

    pub fn save(&self, path: &Path, dtype: Dtype) -> Result<(), CheckpointError> {
        std::fs::write(path, self.to_bytes(dtype))?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, CheckpointError> {
        Self::from_bytes(&std::fs::read(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Checkpoint {
        let mut params = ParamStore::new();
        params.add("w", Tensor::matrix(2, 2, vec![0.1, -0.2, 0.3, 1e-12]).unwrap());
        params.add("b", Tensor::scalar(0.25));
        Checkpoint { config: serde_json::json!({"d_model": 4}), vocab: vec!["[CLS]".into(), "x".into()], params }
    }

    #[test]
    fn round_trip_f64_is_exact() {
        let ck = sample();
        let bytes = ck.to_bytes(Dtype::F64);
        assert_eq!(Checkpoint::from_bytes(&bytes).unwrap(), ck);
        assert_eq!(bytes, ck.to_bytes(Dtype::F64));
    }

    #[test]
    fn round_trip_f32_is_close() {
        let ck = sample();
        let back = Checkpoint::from_bytes(&ck.to_bytes(Dtype::F32)).unwrap();
        for ((_, _, a), (_, _, b)) in ck.params.iter().zip(back.params.iter()) {
            for (x, y) in a.data.iter().zip(&b.data) {
                assert!((x - y).abs() <= 1e-7 * x.abs().max(1e-30));
            }
        }
    }

    #[test]
    fn rejects_garbage() {
        assert!(matches!(Checkpoint::from_bytes(b"nope"), Err(CheckpointError::Format(_))));
        let mut bytes = sample().to_bytes(Dtype::F64);
        bytes[4] = 9;
        assert!(matches!(Checkpoint::from_bytes(&bytes), Err(CheckpointError::Version(9))));
        let bytes = sample().to_bytes(Dtype::F64);
        assert!(Checkpoint::from_bytes(&bytes[..bytes.len() - 3]).is_err());
    }
}
