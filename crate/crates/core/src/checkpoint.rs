//! Trained model bundle.
//!
//! ```text
//! magic       8 bytes  "UASTCKPT"
//! version     u32      currently 1
//! header_len  u32
//! header      JSON     run config, model config, vocabulary, labels,
//!                      unification table (text and hash), training
//!                      metadata, parameter names
//! tensors     one per parameter name, each as written by `write_tensor`
//! ```
//!
//! All integers are little-endian. Identical inputs give identical bytes.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::frontend::{UnificationTable, Vocabulary};
use crate::model::{ModelConfig, ParamStore, UastModel};
use crate::run::RunConfig;
use crate::tensor::{read_tensor, write_tensor};

const MAGIC: &[u8; 8] = b"UASTCKPT";
const VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum CheckpointError {
    #[error("{path}: {reason}")]
    Io { path: String, reason: String },
    #[error("not a checkpoint (bad magic)")]
    BadMagic,
    #[error("unsupported checkpoint version {0}")]
    UnsupportedVersion(u32),
    #[error("corrupt checkpoint: {0}")]
    Corrupt(String),
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainingMeta {
    pub seed: u64,
    /// Epoch the stored parameters come from.
    pub epoch: usize,
    pub steps: usize,
    pub best_val_accuracy: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub run: RunConfig,
    pub model: UastModel,
    pub vocab: Vocabulary,
    pub labels: Vec<String>,
    /// `None` when the run kept raw grammar kinds.
    pub table: Option<UnificationTable>,
    pub meta: TrainingMeta,
}

#[derive(Serialize, Deserialize)]
struct Header {
    run: RunConfig,
    model: ModelConfig,
    vocab: Vocabulary,
    vocab_hash: String,
    labels: Vec<String>,
    table: Option<String>,
    table_hash: Option<String>,
    meta: TrainingMeta,
    params: Vec<String>,
}

impl Checkpoint {
    pub fn table_hash(&self) -> Option<String> {
        self.table.as_ref().map(UnificationTable::hash)
    }

    pub fn write_to(&self, out: &mut impl Write) -> Result<(), CheckpointError> {
        let header = Header {
            run: self.run.clone(),
            model: self.model.config.clone(),
            vocab: self.vocab.clone(),
            vocab_hash: self.vocab.hash(),
            labels: self.labels.clone(),
            table: self
                .table
                .as_ref()
                .map(UnificationTable::to_canonical_string),
            table_hash: self.table_hash(),
            meta: self.meta.clone(),
            params: self.model.params.names().to_vec(),
        };
        let json =
            serde_json::to_vec(&header).map_err(|e| CheckpointError::Corrupt(e.to_string()))?;
        let io = |e: std::io::Error| CheckpointError::Io {
            path: "<stream>".into(),
            reason: e.to_string(),
        };
        out.write_all(MAGIC).map_err(io)?;
        out.write_all(&VERSION.to_le_bytes()).map_err(io)?;
        out.write_all(&(json.len() as u32).to_le_bytes())
            .map_err(io)?;
        out.write_all(&json).map_err(io)?;
        for t in self.model.params.tensors() {
            write_tensor(out, t).map_err(|e| CheckpointError::Corrupt(e.to_string()))?;
        }
        Ok(())
    }

    pub fn read_from(input: &mut impl Read) -> Result<Self, CheckpointError> {
        let truncated = |e: std::io::Error| CheckpointError::Corrupt(e.to_string());
        let mut magic = [0u8; 8];
        input.read_exact(&mut magic).map_err(truncated)?;
        if &magic != MAGIC {
            return Err(CheckpointError::BadMagic);
        }
        let mut b4 = [0u8; 4];
        input.read_exact(&mut b4).map_err(truncated)?;
        let version = u32::from_le_bytes(b4);
        if version != VERSION {
            return Err(CheckpointError::UnsupportedVersion(version));
        }
        input.read_exact(&mut b4).map_err(truncated)?;
        let mut json = vec![0u8; u32::from_le_bytes(b4) as usize];
        input.read_exact(&mut json).map_err(truncated)?;
        let header: Header =
            serde_json::from_slice(&json).map_err(|e| CheckpointError::Corrupt(e.to_string()))?;
        if header.vocab.hash() != header.vocab_hash {
            return Err(CheckpointError::Corrupt("vocabulary hash mismatch".into()));
        }
        let table = match header.table {
            Some(text) => {
                let t = UnificationTable::parse(&text)
                    .map_err(|e| CheckpointError::Corrupt(e.to_string()))?;
                if Some(t.hash()) != header.table_hash {
                    return Err(CheckpointError::Corrupt(
                        "unification table hash mismatch".into(),
                    ));
                }
                Some(t)
            }
            None => None,
        };
        let mut params = ParamStore::empty();
        for name in header.params {
            let t =
                read_tensor(input).map_err(|e| CheckpointError::Corrupt(format!("{name}: {e}")))?;
            params.insert(name, t);
        }
        let model = UastModel::from_parts(header.model, params)
            .map_err(|e| CheckpointError::Corrupt(e.to_string()))?;
        Ok(Self {
            run: header.run,
            model,
            vocab: header.vocab,
            labels: header.labels,
            table,
            meta: header.meta,
        })
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::new();
        self.write_to(&mut buf)
            .expect("writing to memory cannot fail");
        buf
    }

    pub fn save(&self, path: &Path) -> Result<(), CheckpointError> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(|e| CheckpointError::Io {
                path: dir.display().to_string(),
                reason: e.to_string(),
            })?;
        }
        fs::write(path, self.to_bytes()).map_err(|e| CheckpointError::Io {
            path: path.display().to_string(),
            reason: e.to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<Self, CheckpointError> {
        let bytes = fs::read(path).map_err(|e| CheckpointError::Io {
            path: path.display().to_string(),
            reason: e.to_string(),
        })?;
        Self::read_from(&mut bytes.as_slice())
    }
}
