//! Source text to unified, vocabulary-indexed syntax trees.

pub(crate) mod ast;
mod grammar;
mod unify;
mod vocab;

pub use ast::{AstNode, Preorder};
#[cfg(feature = "grammars")]
pub use grammar::builtin_kind_names;
pub use grammar::{GrammarBackend, GrammarRegistry, ParsedAst, ERROR_KIND};
pub use unify::{unify_ast, UnificationTable, UnifiedAst};
pub use vocab::{Vocabulary, PAD_INDEX, PAD_TOKEN, UNK_TOKEN};

use crate::lang::Language;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum FrontendError {
    #[error("no grammar registered for {0}")]
    UnsupportedLanguage(Language),
    #[error("{language} parser failed: {reason}")]
    ParseFailure { language: Language, reason: String },
    #[error("malformed S-expression at byte {offset}: {reason}")]
    MalformedSExpr { offset: usize, reason: String },
    #[error("unification table line {line}: {reason}")]
    TableFormat { line: usize, reason: String },
    #[error(
        "unification table line {line}: [{language}] {kind} maps to both {first} and {second}"
    )]
    DuplicateMapping {
        line: usize,
        language: String,
        kind: String,
        first: String,
        second: String,
    },
    #[error("cannot build a vocabulary from an empty corpus")]
    EmptyCorpus,
    #[error("{path}: {reason}")]
    Io { path: String, reason: String },
}

/// Parses `text` with the registered grammar for `lang`.
pub fn parse_source(
    registry: &GrammarRegistry,
    text: &str,
    lang: Language,
) -> Result<ParsedAst, FrontendError> {
    registry.parse_source(text, lang)
}

/// Reads one tree in parenthesized form.
pub fn load_ast_sexpr(text: &str) -> Result<AstNode, FrontendError> {
    AstNode::from_sexpr(text)
}

pub fn build_vocabulary<'a>(
    corpus: impl IntoIterator<Item = &'a UnifiedAst>,
) -> Result<Vocabulary, FrontendError> {
    Vocabulary::build(corpus)
}
