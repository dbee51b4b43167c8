//! Model container.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! 8 bytes   magic "IMPMODEL"
//! u32       format version (1)
//! u8        scalar width in bytes (4 = f32, 8 = f64)
//! u32       header length n
//! n bytes   UTF-8 JSON header: config, normalizer, vocabulary digest and
//!           the name and shape of every tensor, in storage order
//! ...       tensor values, row-major, little-endian, in header order
//! ```

use serde::{Deserialize, Serialize};

use super::config::ModelConfig;
use super::normalizer::Normalizer;
use super::params::{ModelParams, TENSOR_NAMES};
use super::tensor::Tensor;
use crate::num::Float;
use crate::{Error, Result};

pub const MAGIC: &[u8; 8] = b"IMPMODEL";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct SavedModel<F> {
    pub params: ModelParams<F>,
    pub normalizer: Normalizer,
    /// Hex SHA-256 of the vocabulary file the token ids refer to.
    pub vocab_sha256: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TensorEntry {
    name: String,
    shape: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    config: ModelConfig,
    normalizer: Normalizer,
    vocab_sha256: String,
    tensors: Vec<TensorEntry>,
}

fn take<'a>(buf: &mut &'a [u8], n: usize) -> Result<&'a [u8]> {
    if buf.len() < n {
        return Err(Error::Format("model file truncated".into()));
    }
    let (a, b) = buf.split_at(n);
    *buf = b;
    Ok(a)
}

fn read_u32(buf: &mut &[u8]) -> Result<u32> {
    let b = take(buf, 4)?;
    Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
}

impl<F: Float> SavedModel<F> {
    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let header = Header {
            config: self.params.config,
            normalizer: self.normalizer.clone(),
            vocab_sha256: self.vocab_sha256.clone(),
            tensors: TENSOR_NAMES
                .iter()
                .zip(self.params.tensors())
                .map(|(n, t)| TensorEntry {
                    name: n.to_string(),
                    shape: t.shape.clone(),
                })
                .collect(),
        };
        let json = serde_json::to_vec(&header).map_err(|e| Error::Format(e.to_string()))?;
        let mut out = Vec::with_capacity(17 + json.len() + self.params.num_params() * F::WIDTH);
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        out.push(F::WIDTH as u8);
        out.extend_from_slice(&(json.len() as u32).to_le_bytes());
        out.extend_from_slice(&json);
        for t in self.params.tensors() {
            for &v in &t.data {
                v.write_le(&mut out);
            }
        }
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut buf = bytes;
        if take(&mut buf, 8)? != MAGIC {
            return Err(Error::Format("not a model file".into()));
        }
        let version = read_u32(&mut buf)?;
        if version != FORMAT_VERSION {
            return Err(Error::Format(format!(
                "unsupported model format version {version}"
            )));
        }
        let width = take(&mut buf, 1)?[0] as usize;
        if width != F::WIDTH {
            return Err(Error::Format(format!(
                "model stores {width}-byte scalars, reader expects {}",
                F::WIDTH
            )));
        }
        let n = read_u32(&mut buf)? as usize;
        let header: Header =
            serde_json::from_slice(take(&mut buf, n)?).map_err(|e| Error::Format(e.to_string()))?;
        let mut params = ModelParams::<F>::zeros(header.config)?;
        if header.tensors.len() != TENSOR_NAMES.len() {
            return Err(Error::Format("unexpected tensor count".into()));
        }
        if header.normalizer.dim() != header.config.metadata_dim {
            return Err(Error::Format(
                "normalizer width differs from metadata_dim".into(),
            ));
        }
        for ((entry, name), t) in header
            .tensors
            .iter()
            .zip(TENSOR_NAMES)
            .zip(params.tensors_mut())
        {
            if entry.name != name || entry.shape != t.shape {
                return Err(Error::Format(format!(
                    "tensor {} with shape {:?} does not match config",
                    entry.name, entry.shape
                )));
            }
            let raw = take(&mut buf, t.len() * F::WIDTH)?;
            let data = raw.chunks_exact(F::WIDTH).map(F::read_le).collect();
            *t = Tensor::from_vec(&entry.shape, data)?;
        }
        if !buf.is_empty() {
            return Err(Error::Format("trailing bytes after model data".into()));
        }
        Ok(Self {
            params,
            normalizer: header.normalizer,
            vocab_sha256: header.vocab_sha256,
        })
    }
}
