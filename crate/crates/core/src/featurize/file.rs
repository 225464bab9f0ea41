//! Binary container for featurized corpora.
//!
//! All integers are little-endian.
//!
//! ```text
//! magic      8 bytes  "UASTFEAT"
//! version    u32      currently 1
//! header_len u32      length of the JSON header that follows
//! header     JSON     {"path_length", "graph_size", "vocab", "labels"}
//! count      u64      number of records
//! record*:
//!   label        u32
//!   language     u8   (c=0, cpp=1, java=2, python=3, javascript=4)
//!   split        u8   (train=0, validation=1, test=2, none=255)
//!   path_len     u32, then path_len bytes of UTF-8
//!   true_length  u32
//!   indices      path_length x u32
//!   node_count   u32
//!   node_kinds   node_count x u32
//!   edge_count   u32
//!   edges        edge_count x (u32 parent, u32 child)
//! ```
//!
//! The normalized adjacency is not stored; it is rebuilt from the edges.

use std::io::{self, Read, Write};

use serde::{Deserialize, Serialize};

use super::{Features, GraphSample, PathSequence};
use crate::dataset::Split;
use crate::frontend::Vocabulary;
use crate::lang::Language;

const MAGIC: &[u8; 8] = b"UASTFEAT";
const VERSION: u32 = 1;
const NO_SPLIT: u8 = 255;

#[derive(Debug, thiserror::Error)]
pub enum FeatureFileError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("not a feature file (bad magic)")]
    BadMagic,
    #[error("unsupported feature file version {0}")]
    UnsupportedVersion(u32),
    #[error("corrupt feature file: {0}")]
    Corrupt(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct FeatureRecord {
    pub path: String,
    pub label: usize,
    pub language: Language,
    pub split: Option<Split>,
    pub features: Features,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FeatureFile {
    pub path_length: usize,
    pub graph_size: usize,
    pub vocab: Vocabulary,
    pub labels: Vec<String>,
    pub records: Vec<FeatureRecord>,
}

#[derive(Serialize, Deserialize)]
struct Header {
    path_length: usize,
    graph_size: usize,
    vocab: Vocabulary,
    labels: Vec<String>,
}

fn put_u32(w: &mut impl Write, v: usize) -> Result<(), FeatureFileError> {
    let v = u32::try_from(v)
        .map_err(|_| FeatureFileError::Corrupt(format!("value {v} exceeds u32")))?;
    w.write_all(&v.to_le_bytes())?;
    Ok(())
}

fn get_u32(r: &mut impl Read) -> Result<usize, FeatureFileError> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b) as usize)
}

fn get_u8(r: &mut impl Read) -> Result<u8, FeatureFileError> {
    let mut b = [0u8; 1];
    r.read_exact(&mut b)?;
    Ok(b[0])
}

pub fn write_feature_file(w: &mut impl Write, file: &FeatureFile) -> Result<(), FeatureFileError> {
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    let header = serde_json::to_vec(&Header {
        path_length: file.path_length,
        graph_size: file.graph_size,
        vocab: file.vocab.clone(),
        labels: file.labels.clone(),
    })
    .map_err(|e| FeatureFileError::Corrupt(e.to_string()))?;
    put_u32(w, header.len())?;
    w.write_all(&header)?;
    w.write_all(&(file.records.len() as u64).to_le_bytes())?;
    for rec in &file.records {
        let (path, graph) = (&rec.features.path, &rec.features.graph);
        if path.len() != file.path_length || graph.size() != file.graph_size {
            return Err(FeatureFileError::Corrupt(format!(
                "{}: features shaped ({}, {}) in a ({}, {}) file",
                rec.path,
                path.len(),
                graph.size(),
                file.path_length,
                file.graph_size
            )));
        }
        put_u32(w, rec.label)?;
        w.write_all(&[rec.language.code(), rec.split.map_or(NO_SPLIT, Split::code)])?;
        put_u32(w, rec.path.len())?;
        w.write_all(rec.path.as_bytes())?;
        put_u32(w, path.true_length)?;
        for &i in &path.indices {
            put_u32(w, i)?;
        }
        put_u32(w, graph.node_count())?;
        for &k in &graph.node_kinds()[..graph.node_count()] {
            put_u32(w, k)?;
        }
        put_u32(w, graph.edges().len())?;
        for &(a, b) in graph.edges() {
            put_u32(w, a)?;
            put_u32(w, b)?;
        }
    }
    Ok(())
}

pub fn read_feature_file(r: &mut impl Read) -> Result<FeatureFile, FeatureFileError> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(FeatureFileError::BadMagic);
    }
    let version = get_u32(r)? as u32;
    if version != VERSION {
        return Err(FeatureFileError::UnsupportedVersion(version));
    }
    let mut header = vec![0u8; get_u32(r)?];
    r.read_exact(&mut header)?;
    let header: Header =
        serde_json::from_slice(&header).map_err(|e| FeatureFileError::Corrupt(e.to_string()))?;
    let (l, n) = (header.path_length, header.graph_size);
    if l == 0 || n == 0 {
        return Err(FeatureFileError::Corrupt(
            "zero path length or graph size".into(),
        ));
    }
    let vocab_size = header.vocab.size();
    let check_index = |i: usize| {
        if i < vocab_size {
            Ok(i)
        } else {
            Err(FeatureFileError::Corrupt(format!(
                "kind index {i} outside vocabulary of {vocab_size}"
            )))
        }
    };

    let mut count = [0u8; 8];
    r.read_exact(&mut count)?;
    let count = u64::from_le_bytes(count);
    let mut records = Vec::new();
    for _ in 0..count {
        let label = get_u32(r)?;
        if label >= header.labels.len() {
            return Err(FeatureFileError::Corrupt(format!(
                "label {label} out of range"
            )));
        }
        let language = Language::from_code(get_u8(r)?)
            .ok_or_else(|| FeatureFileError::Corrupt("bad language code".into()))?;
        let split = match get_u8(r)? {
            NO_SPLIT => None,
            c => Some(
                Split::from_code(c)
                    .ok_or_else(|| FeatureFileError::Corrupt(format!("bad split code {c}")))?,
            ),
        };
        let mut path = vec![0u8; get_u32(r)?];
        r.read_exact(&mut path)?;
        let path = String::from_utf8(path).map_err(|e| FeatureFileError::Corrupt(e.to_string()))?;
        let true_length = get_u32(r)?;
        if true_length == 0 || true_length > l {
            return Err(FeatureFileError::Corrupt(format!(
                "{path}: true_length {true_length} with L={l}"
            )));
        }
        let indices = (0..l)
            .map(|_| get_u32(r).and_then(check_index))
            .collect::<Result<Vec<_>, _>>()?;
        let node_count = get_u32(r)?;
        if node_count > n {
            return Err(FeatureFileError::Corrupt(format!(
                "{path}: {node_count} nodes with N={n}"
            )));
        }
        let kinds = (0..node_count)
            .map(|_| get_u32(r).and_then(check_index))
            .collect::<Result<Vec<_>, _>>()?;
        let edge_count = get_u32(r)?;
        let edges = (0..edge_count)
            .map(|_| Ok((get_u32(r)?, get_u32(r)?)))
            .collect::<Result<Vec<_>, FeatureFileError>>()?;
        let graph = GraphSample::from_edges(n, kinds, edges)
            .map_err(|e| FeatureFileError::Corrupt(format!("{path}: {e}")))?;
        records.push(FeatureRecord {
            path,
            label,
            language,
            split,
            features: Features {
                path: PathSequence {
                    indices,
                    true_length,
                },
                graph,
            },
        });
    }
    Ok(FeatureFile {
        path_length: l,
        graph_size: n,
        vocab: header.vocab,
        labels: header.labels,
        records,
    })
}
