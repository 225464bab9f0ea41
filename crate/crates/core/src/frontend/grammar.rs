use std::collections::BTreeMap;

use super::{AstNode, FrontendError};
use crate::lang::Language;

/// Kind label given to subtrees the grammar could not parse.
pub const ERROR_KIND: &str = "ERROR";

/// Output of a grammar backend.
#[derive(Clone, Debug, PartialEq)]
pub struct ParsedAst {
    pub root: AstNode,
    /// The backend recovered from syntax errors; the tree holds `ERROR` nodes
    /// or zero-width inserted nodes.
    pub has_errors: bool,
}

/// Something that turns source text into a kind-labelled tree.
pub trait GrammarBackend: Send + Sync {
    fn parse(&self, text: &str) -> Result<ParsedAst, FrontendError>;
}

/// Grammar backends by language.
///
/// Languages without a backend can still enter the pipeline as S-expression
/// files.
#[derive(Default)]
pub struct GrammarRegistry {
    backends: BTreeMap<Language, Box<dyn GrammarBackend>>,
}

impl GrammarRegistry {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Every grammar compiled into this build (all five languages with the
    /// `grammars` feature, none without it).
    pub fn with_builtin() -> Self {
        let mut reg = Self::empty();
        #[cfg(feature = "grammars")]
        for lang in Language::ALL {
            reg.register(
                lang,
                Box::new(tree_sitter_backend::TreeSitterBackend::new(lang)),
            );
        }
        reg
    }

    pub fn register(&mut self, lang: Language, backend: Box<dyn GrammarBackend>) {
        self.backends.insert(lang, backend);
    }

    pub fn supports(&self, lang: Language) -> bool {
        self.backends.contains_key(&lang)
    }

    pub fn languages(&self) -> Vec<Language> {
        self.backends.keys().copied().collect()
    }

    pub fn parse_source(&self, text: &str, lang: Language) -> Result<ParsedAst, FrontendError> {
        self.backends
            .get(&lang)
            .ok_or(FrontendError::UnsupportedLanguage(lang))?
            .parse(text)
    }
}

/// Named, visible node kinds a built-in grammar can produce.
#[cfg(feature = "grammars")]
pub fn builtin_kind_names(lang: Language) -> std::collections::BTreeSet<String> {
    let grammar = tree_sitter_backend::TreeSitterBackend::new(lang).grammar;
    (0..grammar.node_kind_count() as u16)
        .filter(|&id| grammar.node_kind_is_named(id) && grammar.node_kind_is_visible(id))
        .filter_map(|id| grammar.node_kind_for_id(id).map(str::to_string))
        .collect()
}

#[cfg(feature = "grammars")]
mod tree_sitter_backend {
    use super::*;

    pub struct TreeSitterBackend {
        lang: Language,
        pub(super) grammar: tree_sitter::Language,
    }

    impl TreeSitterBackend {
        pub fn new(lang: Language) -> Self {
            let grammar: tree_sitter::Language = match lang {
                Language::C => tree_sitter_c::LANGUAGE.into(),
                Language::Cpp => tree_sitter_cpp::LANGUAGE.into(),
                Language::Java => tree_sitter_java::LANGUAGE.into(),
                Language::Python => tree_sitter_python::LANGUAGE.into(),
                Language::JavaScript => tree_sitter_javascript::LANGUAGE.into(),
            };
            Self { lang, grammar }
        }
    }

    impl GrammarBackend for TreeSitterBackend {
        /// Keeps named nodes only; comments and other extras are dropped.
        fn parse(&self, text: &str) -> Result<ParsedAst, FrontendError> {
            let mut parser = tree_sitter::Parser::new();
            parser
                .set_language(&self.grammar)
                .map_err(|e| FrontendError::ParseFailure {
                    language: self.lang,
                    reason: e.to_string(),
                })?;
            let tree = parser
                .parse(text, None)
                .ok_or_else(|| FrontendError::ParseFailure {
                    language: self.lang,
                    reason: "parser returned no tree".into(),
                })?;
            let root = tree.root_node();
            let mut nodes: Vec<(String, Option<usize>)> = Vec::new();
            let mut stack = vec![(root, None)];
            while let Some((node, parent)) = stack.pop() {
                let kind = if node.is_error() {
                    ERROR_KIND
                } else {
                    node.kind()
                };
                nodes.push((kind.to_string(), parent));
                let idx = nodes.len() - 1;
                let mut cursor = node.walk();
                let kept: Vec<_> = node
                    .named_children(&mut cursor)
                    .filter(|c| !c.is_extra() || c.is_error())
                    .collect();
                stack.extend(kept.into_iter().rev().map(|c| (c, Some(idx))));
            }
            Ok(ParsedAst {
                root: AstNode::from_preorder(nodes),
                has_errors: root.has_error(),
            })
        }
    }
}
