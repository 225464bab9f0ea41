//! Corpus ingestion and deterministic train/validation/test splits.

mod ingest;
mod split;
pub mod synth;

pub use ingest::{
    ingest_corpus, mask_identifiers, Corpus, CorpusFile, IngestOptions, SourceFormat,
    SEXPR_EXTENSIONS,
};
pub use split::{split_counts, split_dataset, Split, SplitRatios};

use crate::frontend::{
    unify_ast, AstNode, FrontendError, GrammarRegistry, UnificationTable, UnifiedAst,
};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum DatasetError {
    #[error("cannot infer the language of {0}")]
    UnknownExtension(String),
    #[error("class {0} has no files")]
    EmptyClass(String),
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("manifest line {line}: {reason}")]
    Manifest { line: usize, reason: String },
    #[error("{path}: {reason}")]
    Io { path: String, reason: String },
    #[error("{path}: {source}")]
    Frontend {
        path: String,
        #[source]
        source: Box<FrontendError>,
    },
}

/// Parses one corpus file. With `table` the tree is unified; without it the
/// grammar's own kinds are kept.
pub fn parse_file(
    registry: &GrammarRegistry,
    table: Option<&UnificationTable>,
    file: &CorpusFile,
) -> Result<UnifiedAst, DatasetError> {
    let wrap = |source| DatasetError::Frontend {
        path: file.id.clone(),
        source: Box::new(source),
    };
    let raw = match file.format {
        SourceFormat::Code => {
            let parsed = registry
                .parse_source(&file.text, file.language)
                .map_err(wrap)?;
            if parsed.has_errors {
                log::debug!("{}: parsed with recovered syntax errors", file.id);
            }
            parsed.root
        }
        SourceFormat::Sexpr => AstNode::from_sexpr(&file.text).map_err(wrap)?,
    };
    Ok(match table {
        Some(t) => unify_ast(&raw, file.language, t),
        None => UnifiedAst::raw(raw),
    })
}

/// Parses every file, in corpus order.
pub fn parse_corpus(
    registry: &GrammarRegistry,
    table: Option<&UnificationTable>,
    corpus: &Corpus,
) -> Result<Vec<UnifiedAst>, DatasetError> {
    corpus
        .files
        .iter()
        .map(|f| parse_file(registry, table, f))
        .collect()
}
