//! Checkpoints: a JSON manifest (tensor names, shapes, byte offsets, vocab
//! snapshots, config) next to one little-endian f64 blob.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::corpus::tokens::{rehydrate, TokenVocab};
use crate::error::{DmgError, Result};
use crate::model::config::ModelConfig;
use crate::model::params::DmgParams;
use crate::numcore::Rng;

#[derive(Debug, Serialize, Deserialize)]
pub struct TensorEntry {
    pub name: String,
    pub shape: Vec<usize>,
    /// Offset into the blob, in bytes.
    pub offset: usize,
    /// Element count.
    pub len: usize,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub format: String,
    pub dtype: String,
    pub model: ModelConfig,
    pub vocab_src: Vec<String>,
    pub vocab_tgt: Vec<String>,
    pub tensors: Vec<TensorEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extra: Option<serde_json::Value>,
}

pub const FORMAT: &str = "dmg-checkpoint-v1";

fn manifest_path(base: &Path) -> PathBuf {
    base.with_extension("json")
}

fn blob_path(base: &Path) -> PathBuf {
    base.with_extension("bin")
}

pub fn save_checkpoint(
    base: &Path,
    params: &DmgParams,
    vocab_src: &TokenVocab,
    vocab_tgt: &TokenVocab,
    extra: Option<serde_json::Value>,
) -> Result<()> {
    let mut tensors = Vec::with_capacity(params.store.len());
    let mut blob: Vec<u8> = Vec::new();
    for i in 0..params.store.len() {
        let t = params.store.get(i);
        tensors.push(TensorEntry {
            name: params.store.name(i).to_string(),
            shape: t.shape.clone(),
            offset: blob.len(),
            len: t.data.len(),
        });
        for v in &t.data {
            blob.extend_from_slice(&v.to_le_bytes());
        }
    }
    let manifest = Manifest {
        format: FORMAT.to_string(),
        dtype: "f64-le".to_string(),
        model: params.cfg,
        vocab_src: vocab_src.tokens().to_vec(),
        vocab_tgt: vocab_tgt.tokens().to_vec(),
        tensors,
        extra,
    };
    let mut json = serde_json::to_vec_pretty(&manifest)?;
    json.push(b'\n');
    crate::corpus::write_atomic(&manifest_path(base), &json)?;
    crate::corpus::write_atomic(&blob_path(base), &blob)?;
    Ok(())
}

pub struct LoadedCheckpoint {
    pub params: DmgParams,
    pub vocab_src: TokenVocab,
    pub vocab_tgt: TokenVocab,
    pub extra: Option<serde_json::Value>,
}

pub fn load_checkpoint(base: &Path) -> Result<LoadedCheckpoint> {
    let manifest: Manifest =
        serde_json::from_slice(&std::fs::read(manifest_path(base))?)?;
    if manifest.format != FORMAT {
        return Err(DmgError::Checkpoint(format!(
            "unsupported checkpoint format {:?}",
            manifest.format
        )));
    }
    let blob = std::fs::read(blob_path(base))?;

    // seed is irrelevant here; every tensor is overwritten below
    let mut params = DmgParams::init(manifest.model, &mut Rng::new(0));
    if manifest.tensors.len() != params.store.len() {
        return Err(DmgError::Checkpoint(format!(
            "expected {} tensors, manifest has {}",
            params.store.len(),
            manifest.tensors.len()
        )));
    }
    for (i, entry) in manifest.tensors.iter().enumerate() {
        if params.store.name(i) != entry.name {
            return Err(DmgError::Checkpoint(format!(
                "tensor {i} is {:?}, expected {:?}",
                entry.name,
                params.store.name(i)
            )));
        }
        let t = params.store.get_mut(i);
        if t.shape != entry.shape || t.data.len() != entry.len {
            return Err(DmgError::Checkpoint(format!(
                "tensor {:?} shape mismatch: {:?} vs {:?}",
                entry.name, entry.shape, t.shape
            )));
        }
        let end = entry.offset + entry.len * 8;
        if end > blob.len() {
            return Err(DmgError::Checkpoint(format!(
                "tensor {:?} extends past blob end",
                entry.name
            )));
        }
        for (j, chunk) in blob[entry.offset..end].chunks_exact(8).enumerate() {
            t.data[j] = f64::from_le_bytes(chunk.try_into().unwrap());
        }
    }

    let mut vocab_src = TokenVocab::from_tokens(manifest.vocab_src)?;
    let mut vocab_tgt = TokenVocab::from_tokens(manifest.vocab_tgt)?;
    rehydrate(&mut vocab_src);
    rehydrate(&mut vocab_tgt);
    Ok(LoadedCheckpoint {
        params,
        vocab_src,
        vocab_tgt,
        extra: manifest.extra,
    })
}
