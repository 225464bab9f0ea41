use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use walkdir::WalkDir;

use super::DatasetError;
use crate::lang::Language;

/// Extensions for files that already hold a parenthesized tree.
pub const SEXPR_EXTENSIONS: [&str; 2] = ["sexp", "sexpr"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SourceFormat {
    Code,
    Sexpr,
}

/// One labeled corpus file, read into memory.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CorpusFile {
    pub path: PathBuf,
    /// Path relative to the corpus root (or as written in the manifest).
    pub id: String,
    pub label: usize,
    pub language: Language,
    pub format: SourceFormat,
    pub text: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Corpus {
    /// Class names in index order (lexicographic).
    pub labels: Vec<String>,
    pub files: Vec<CorpusFile>,
    /// Ids of exact duplicates that were dropped.
    pub duplicates: Vec<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestOptions {
    /// Identifiers replaced by `XXX` before parsing.
    pub mask_names: Vec<String>,
}

impl Corpus {
    pub fn len(&self) -> usize {
        self.files.len()
    }

    pub fn is_empty(&self) -> bool {
        self.files.is_empty()
    }

    pub fn num_classes(&self) -> usize {
        self.labels.len()
    }

    /// File count per (label, language).
    pub fn counts(&self) -> BTreeMap<(String, Language), usize> {
        let mut out = BTreeMap::new();
        for f in &self.files {
            *out.entry((self.labels[f.label].clone(), f.language))
                .or_insert(0) += 1;
        }
        out
    }

    pub fn language_counts(&self) -> BTreeMap<Language, usize> {
        let mut out = BTreeMap::new();
        for f in &self.files {
            *out.entry(f.language).or_insert(0) += 1;
        }
        out
    }
}

struct Entry {
    path: PathBuf,
    id: String,
    label: String,
    language: Option<Language>,
}

fn io_error(path: &Path, e: impl std::fmt::Display) -> DatasetError {
    DatasetError::Io {
        path: path.display().to_string(),
        reason: e.to_string(),
    }
}

fn is_sexpr(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| SEXPR_EXTENSIONS.contains(&e))
}

fn is_hidden(path: &Path) -> bool {
    path.file_name()
        .and_then(|n| n.to_str())
        .is_some_and(|n| n.starts_with('.'))
}

/// `root/<label>/<language>/<file>`, or `root/<label>/<file>` with the
/// language taken from the extension.
fn scan_directory(root: &Path) -> Result<(Vec<Entry>, BTreeSet<String>), DatasetError> {
    let mut labels = BTreeSet::new();
    let mut entries = Vec::new();
    let mut top: Vec<_> = fs::read_dir(root)
        .map_err(|e| io_error(root, e))?
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| io_error(root, e))?;
    top.sort_by_key(|e| e.file_name());
    for class_dir in top {
        let class_path = class_dir.path();
        if !class_path.is_dir() || is_hidden(&class_path) {
            continue;
        }
        let label = class_dir.file_name().to_string_lossy().into_owned();
        labels.insert(label.clone());
        for item in WalkDir::new(&class_path).sort_by_file_name().min_depth(1) {
            let item = item.map_err(|e| io_error(&class_path, e))?;
            if !item.file_type().is_file() || is_hidden(item.path()) {
                continue;
            }
            let rel = item
                .path()
                .strip_prefix(&class_path)
                .expect("walk stays under class dir");
            let mut parts = rel.components();
            let language = if rel.components().count() >= 2 {
                let dir = parts
                    .next()
                    .expect("at least two parts")
                    .as_os_str()
                    .to_string_lossy();
                dir.parse::<Language>().ok()
            } else {
                None
            };
            let id = item
                .path()
                .strip_prefix(root)
                .unwrap_or(item.path())
                .to_string_lossy()
                .replace('\\', "/");
            entries.push(Entry {
                path: item.path().to_path_buf(),
                id,
                label: label.clone(),
                language,
            });
        }
    }
    Ok((entries, labels))
}

/// Rows of `path,label,language`; language may be empty. Relative paths are
/// resolved against `root`, or the manifest's directory when no root is given.
fn read_manifest(
    manifest: &Path,
    root: Option<&Path>,
) -> Result<(Vec<Entry>, BTreeSet<String>), DatasetError> {
    let base = root
        .map(Path::to_path_buf)
        .or_else(|| manifest.parent().map(Path::to_path_buf))
        .unwrap_or_default();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_path(manifest)
        .map_err(|e| io_error(manifest, e))?;
    let mut entries = Vec::new();
    let mut labels = BTreeSet::new();
    for (i, row) in reader.records().enumerate() {
        let row = row.map_err(|e| DatasetError::Manifest {
            line: i + 1,
            reason: e.to_string(),
        })?;
        let line = row.position().map_or(i + 1, |p| p.line() as usize);
        if i == 0 && row.get(0) == Some("path") && row.get(1) == Some("label") {
            continue;
        }
        if row.len() < 2 || row.len() > 3 {
            return Err(DatasetError::Manifest {
                line,
                reason: format!("expected path,label[,language], got {} fields", row.len()),
            });
        }
        let (path, label) = (&row[0], &row[1]);
        if path.is_empty() || label.is_empty() {
            return Err(DatasetError::Manifest {
                line,
                reason: "empty path or label".into(),
            });
        }
        let language = match row.get(2).filter(|s| !s.is_empty()) {
            Some(l) => Some(l.parse::<Language>().map_err(|e| DatasetError::Manifest {
                line,
                reason: e.to_string(),
            })?),
            None => None,
        };
        labels.insert(label.to_string());
        entries.push(Entry {
            path: base.join(path),
            id: path.to_string(),
            label: label.to_string(),
            language,
        });
    }
    Ok((entries, labels))
}

fn is_ident_byte(b: u8) -> bool {
    b.is_ascii_alphanumeric() || b == b'_' || b == b'$'
}

/// Replaces whole-word occurrences of each name with `XXX`.
pub fn mask_identifiers(text: &str, names: &[String]) -> String {
    if names.is_empty() {
        return text.to_string();
    }
    let names: BTreeSet<&str> = names.iter().map(String::as_str).collect();
    let bytes = text.as_bytes();
    let mut out = String::with_capacity(text.len());
    let mut i = 0;
    while i < bytes.len() {
        if is_ident_byte(bytes[i]) {
            let start = i;
            while i < bytes.len() && is_ident_byte(bytes[i]) {
                i += 1;
            }
            let word = &text[start..i];
            out.push_str(if names.contains(word) { "XXX" } else { word });
        } else {
            let ch = text[i..].chars().next().expect("in bounds");
            out.push(ch);
            i += ch.len_utf8();
        }
    }
    out
}

/// Reads a labeled corpus from a directory tree or a manifest.
///
/// Byte-identical files are kept once (first in path order) and the rest
/// reported in [`Corpus::duplicates`].
pub fn ingest_corpus(
    root: Option<&Path>,
    manifest: Option<&Path>,
    options: &IngestOptions,
) -> Result<Corpus, DatasetError> {
    let (entries, label_set) = match (root, manifest) {
        (_, Some(m)) => read_manifest(m, root)?,
        (Some(r), None) => scan_directory(r)?,
        (None, None) => return Err(DatasetError::EmptyCorpus),
    };
    let labels: Vec<String> = label_set.into_iter().collect();
    let label_index: HashMap<&str, usize> = labels
        .iter()
        .enumerate()
        .map(|(i, l)| (l.as_str(), i))
        .collect();

    let mut seen: HashMap<[u8; 32], String> = HashMap::new();
    let mut files = Vec::new();
    let mut duplicates = Vec::new();
    for entry in entries {
        let format = if is_sexpr(&entry.path) {
            SourceFormat::Sexpr
        } else {
            SourceFormat::Code
        };
        let language = match (entry.language, format) {
            (Some(l), _) => l,
            (None, SourceFormat::Code) => Language::from_path(&entry.path)
                .ok_or_else(|| DatasetError::UnknownExtension(entry.id.clone()))?,
            (None, SourceFormat::Sexpr) => {
                return Err(DatasetError::UnknownExtension(entry.id.clone()))
            }
        };
        let bytes = fs::read(&entry.path).map_err(|e| io_error(&entry.path, e))?;
        let digest: [u8; 32] = Sha256::digest(&bytes).into();
        if let Some(first) = seen.get(&digest) {
            log::warn!("{} duplicates {}; dropped", entry.id, first);
            duplicates.push(entry.id);
            continue;
        }
        seen.insert(digest, entry.id.clone());
        let text = String::from_utf8_lossy(&bytes);
        let text = match format {
            SourceFormat::Code => mask_identifiers(&text, &options.mask_names),
            SourceFormat::Sexpr => text.into_owned(),
        };
        files.push(CorpusFile {
            path: entry.path,
            id: entry.id,
            label: label_index[entry.label.as_str()],
            language,
            format,
            text,
        });
    }
    for (i, label) in labels.iter().enumerate() {
        if !files.iter().any(|f| f.label == i) {
            return Err(DatasetError::EmptyClass(label.clone()));
        }
    }
    if files.is_empty() {
        return Err(DatasetError::EmptyCorpus);
    }
    Ok(Corpus {
        labels,
        files,
        duplicates,
    })
}
