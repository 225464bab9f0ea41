use std::collections::BTreeMap;
use std::path::Path;

use sha2::{Digest, Sha256};

use super::{AstNode, FrontendError};
use crate::lang::Language;

const DEFAULT_TABLE: &str = include_str!("../../data/unified.table");

/// Per-language renaming of grammar kinds to shared kinds.
///
/// Lookups are total: a kind with no entry maps to itself.
///
/// Text format, one section per language id:
///
/// ```text
/// # comment
/// [java]
/// program = unit
/// block = block
/// ```
///
/// Within a section a source kind may be listed once (repeating the same
/// target is tolerated), and no target may itself be renamed, so applying the
/// table twice is the same as applying it once.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct UnificationTable {
    sections: BTreeMap<String, BTreeMap<String, String>>,
}

impl UnificationTable {
    /// A table with no entries: every kind passes through.
    pub fn passthrough() -> Self {
        Self::default()
    }

    /// The table shipped in `data/unified.table`.
    pub fn builtin() -> Self {
        Self::parse(DEFAULT_TABLE).expect("bundled unification table is valid")
    }

    pub fn load(path: &Path) -> Result<Self, FrontendError> {
        let text = std::fs::read_to_string(path).map_err(|e| FrontendError::Io {
            path: path.display().to_string(),
            reason: e.to_string(),
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, FrontendError> {
        let mut sections: BTreeMap<String, BTreeMap<String, String>> = BTreeMap::new();
        // Line each source kind was defined on, for error messages.
        let mut origin: BTreeMap<(String, String), usize> = BTreeMap::new();
        let mut current: Option<String> = None;
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| FrontendError::TableFormat {
                        line: line_no,
                        reason: "section header must end with ']'".into(),
                    })?;
                let name = name.trim().to_ascii_lowercase();
                if name.is_empty() || name.contains(char::is_whitespace) {
                    return Err(FrontendError::TableFormat {
                        line: line_no,
                        reason: format!("invalid section name {name:?}"),
                    });
                }
                sections.entry(name.clone()).or_default();
                current = Some(name);
                continue;
            }
            let Some((src, dst)) = line.split_once('=') else {
                return Err(FrontendError::TableFormat {
                    line: line_no,
                    reason: "expected 'source_kind = unified_kind'".into(),
                });
            };
            let (src, dst) = (src.trim(), dst.trim());
            let valid = |k: &str| {
                !k.is_empty() && !k.contains(|c: char| c.is_whitespace() || c == '(' || c == ')')
            };
            if !valid(src) || !valid(dst) {
                return Err(FrontendError::TableFormat {
                    line: line_no,
                    reason: format!("invalid kind in {line:?}"),
                });
            }
            let Some(section) = current.clone() else {
                return Err(FrontendError::TableFormat {
                    line: line_no,
                    reason: "entry before any [language] section".into(),
                });
            };
            let map = sections
                .get_mut(&section)
                .expect("section created on header");
            match map.get(src) {
                Some(prev) if prev != dst => {
                    return Err(FrontendError::DuplicateMapping {
                        line: line_no,
                        language: section,
                        kind: src.to_string(),
                        first: prev.clone(),
                        second: dst.to_string(),
                    });
                }
                Some(_) => {}
                None => {
                    map.insert(src.to_string(), dst.to_string());
                    origin.insert((section.clone(), src.to_string()), line_no);
                }
            }
        }
        for (section, map) in &sections {
            for (src, dst) in map {
                if let Some(next) = map.get(dst).filter(|next| *next != dst) {
                    return Err(FrontendError::TableFormat {
                        line: origin[&(section.clone(), src.clone())],
                        reason: format!("[{section}] {src} -> {dst} -> {next}: unified kinds must not be renamed again"),
                    });
                }
            }
        }
        Ok(Self { sections })
    }

    /// Unified kind for `kind` in `lang`.
    pub fn lookup<'a>(&'a self, lang: Language, kind: &'a str) -> &'a str {
        self.sections
            .get(lang.id())
            .and_then(|m| m.get(kind))
            .map_or(kind, String::as_str)
    }

    pub fn entries(&self, lang: Language) -> impl Iterator<Item = (&str, &str)> {
        self.sections
            .get(lang.id())
            .into_iter()
            .flat_map(|m| m.iter().map(|(a, b)| (a.as_str(), b.as_str())))
    }

    pub fn is_empty(&self) -> bool {
        self.sections.values().all(BTreeMap::is_empty)
    }

    /// Canonical text: sections and entries sorted, comments dropped.
    pub fn to_canonical_string(&self) -> String {
        let mut out = String::new();
        for (section, map) in &self.sections {
            if map.is_empty() {
                continue;
            }
            out.push_str(&format!("[{section}]\n"));
            for (src, dst) in map {
                out.push_str(&format!("{src} = {dst}\n"));
            }
        }
        out
    }

    /// SHA-256 of the canonical text, hex encoded.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_canonical_string().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// An AST whose kinds have been passed through a [`UnificationTable`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnifiedAst(AstNode);

impl UnifiedAst {
    /// Wraps a tree without renaming anything (the no-unified-vocabulary mode).
    pub fn raw(ast: AstNode) -> Self {
        Self(ast)
    }

    pub fn root(&self) -> &AstNode {
        &self.0
    }

    pub fn into_root(self) -> AstNode {
        self.0
    }
}

/// Renames every kind through `table`; tree shape is unchanged.
pub fn unify_ast(ast: &AstNode, lang: Language, table: &UnificationTable) -> UnifiedAst {
    UnifiedAst(ast.map_kinds(|k| table.lookup(lang, k).to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::ast::tests::arb_tree;
    use proptest::prelude::*;

    #[test]
    fn builtin_maps_coding_units() {
        let t = UnificationTable::builtin();
        assert_eq!(t.lookup(Language::Java, "program"), "unit");
        assert_eq!(t.lookup(Language::Cpp, "translation_unit"), "unit");
        assert_eq!(t.lookup(Language::Python, "module"), "unit");
        assert_eq!(t.lookup(Language::Cpp, "compound_statement"), "block");
        assert_eq!(t.lookup(Language::Java, "block"), "block");
        assert_eq!(t.lookup(Language::Java, "identifier"), "identifier");
    }

    #[test]
    fn duplicate_mapping_is_rejected() {
        let err = UnificationTable::parse("[java]\nx = y\nx = z\n").unwrap_err();
        assert!(
            matches!(err, FrontendError::DuplicateMapping { line: 3, .. }),
            "{err:?}"
        );
        // Same target twice is not a contradiction.
        assert!(UnificationTable::parse("[java]\nx = y\nx = y\n").is_ok());
        // Different sections are independent.
        assert!(UnificationTable::parse("[java]\nx = y\n[c]\nx = z\n").is_ok());
    }

    #[test]
    fn empty_file_is_passthrough() {
        let t = UnificationTable::parse("").unwrap();
        assert!(t.is_empty());
        assert_eq!(t.lookup(Language::Python, "module"), "module");
        assert_eq!(t, UnificationTable::passthrough());
    }

    #[test]
    fn format_errors_carry_line_numbers() {
        let cases = [
            ("x = y\n", 1),
            ("[java\n", 1),
            ("[java]\n\nnonsense\n", 3),
            ("[java]\na b = c\n", 2),
            ("[java]\n = c\n", 2),
            ("[java]\na = b\nb = c\n", 2),
        ];
        for (text, line) in cases {
            match UnificationTable::parse(text) {
                Err(FrontendError::TableFormat { line: l, .. }) => assert_eq!(l, line, "{text:?}"),
                other => panic!("{text:?}: {other:?}"),
            }
        }
    }

    #[test]
    fn hash_ignores_comments_and_order() {
        let a = UnificationTable::parse("# c\n[java]\na = x\nb = y\n").unwrap();
        let b = UnificationTable::parse("[java]\nb = y\n\na = x\n").unwrap();
        assert_eq!(a.hash(), b.hash());
        assert_ne!(a.hash(), UnificationTable::builtin().hash());
    }

    #[test]
    fn unify_renames_only_mapped_kinds() {
        let ast =
            AstNode::from_sexpr("(program (class_declaration (identifier) (block)))").unwrap();
        let u = unify_ast(&ast, Language::Java, &UnificationTable::builtin());
        assert_eq!(
            u.root().to_sexpr(),
            "(unit (class_definition (identifier) (block)))"
        );
    }

    #[cfg(feature = "grammars")]
    #[test]
    fn builtin_sources_exist_in_grammars() {
        use crate::frontend::grammar::builtin_kind_names;
        let t = UnificationTable::builtin();
        for lang in Language::ALL {
            let known = builtin_kind_names(lang);
            for (src, _) in t.entries(lang) {
                assert!(known.contains(src), "{lang}: {src} is not a grammar kind");
            }
        }
    }

    proptest! {
        #[test]
        fn unify_preserves_shape(t in arb_tree()) {
            let table = UnificationTable::parse("[java]\na = unit\nb = block\nab = a_b\n").unwrap();
            let u = unify_ast(&t, Language::Java, &table);
            let before: Vec<usize> = t.preorder().map(|n| n.children().len()).collect();
            let after: Vec<usize> = u.root().preorder().map(|n| n.children().len()).collect();
            prop_assert_eq!(before, after);
            let twice = unify_ast(u.root(), Language::Java, &table);
            prop_assert_eq!(twice, u);
        }

        #[test]
        fn builtin_table_is_idempotent(t in arb_tree(), lang in 0u8..5) {
            let lang = Language::from_code(lang).unwrap();
            let table = UnificationTable::builtin();
            let once = unify_ast(&t, lang, &table);
            prop_assert_eq!(unify_ast(once.root(), lang, &table), once);
        }
    }
}
