use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{FrontendError, UnifiedAst};

pub const PAD_INDEX: usize = 0;
pub const PAD_TOKEN: &str = "<pad>";
pub const UNK_TOKEN: &str = "<unk>";

/// Frozen map between unified kinds and embedding indices.
///
/// Index 0 is padding, real kinds take `1..=n` in lexicographic order, and
/// `n + 1` is the unknown-kind index.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "VocabFile", into = "VocabFile")]
pub struct Vocabulary {
    kinds: Vec<String>,
    index: HashMap<String, usize>,
}

#[derive(Serialize, Deserialize)]
struct VocabFile {
    kinds: Vec<String>,
}

impl From<VocabFile> for Vocabulary {
    fn from(f: VocabFile) -> Self {
        Self::from_sorted(
            f.kinds
                .into_iter()
                .collect::<BTreeSet<_>>()
                .into_iter()
                .collect(),
        )
    }
}

impl From<Vocabulary> for VocabFile {
    fn from(v: Vocabulary) -> Self {
        VocabFile { kinds: v.kinds }
    }
}

impl Vocabulary {
    fn from_sorted(kinds: Vec<String>) -> Self {
        let index = kinds
            .iter()
            .enumerate()
            .map(|(i, k)| (k.clone(), i + 1))
            .collect();
        Self { kinds, index }
    }

    /// Vocabulary over every kind in `corpus`.
    pub fn build<'a>(
        corpus: impl IntoIterator<Item = &'a UnifiedAst>,
    ) -> Result<Self, FrontendError> {
        let mut seen = BTreeSet::new();
        let mut trees = 0usize;
        for ast in corpus {
            trees += 1;
            seen.extend(ast.root().preorder().map(|n| n.kind().to_string()));
        }
        if trees == 0 {
            return Err(FrontendError::EmptyCorpus);
        }
        Ok(Self::from_sorted(seen.into_iter().collect()))
    }

    pub fn from_kinds(kinds: impl IntoIterator<Item = String>) -> Self {
        Self::from_sorted(
            kinds
                .into_iter()
                .collect::<BTreeSet<_>>()
                .into_iter()
                .collect(),
        )
    }

    /// Number of indices including padding and unknown.
    pub fn size(&self) -> usize {
        self.kinds.len() + 2
    }

    pub fn unk_index(&self) -> usize {
        self.kinds.len() + 1
    }

    /// Index of `kind`, or the unknown index.
    pub fn lookup(&self, kind: &str) -> usize {
        self.index.get(kind).copied().unwrap_or(self.unk_index())
    }

    pub fn contains(&self, kind: &str) -> bool {
        self.index.contains_key(kind)
    }

    pub fn kind(&self, index: usize) -> Option<&str> {
        match index {
            PAD_INDEX => Some(PAD_TOKEN),
            i if i == self.unk_index() => Some(UNK_TOKEN),
            i => self.kinds.get(i - 1).map(String::as_str),
        }
    }

    pub fn kinds(&self) -> &[String] {
        &self.kinds
    }

    /// SHA-256 over the ordered kind list, hex encoded.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        for k in &self.kinds {
            h.update(k.as_bytes());
            h.update([0u8]);
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::ast::tests::arb_tree;
    use crate::frontend::AstNode;
    use proptest::prelude::*;

    fn tree(s: &str) -> UnifiedAst {
        UnifiedAst::raw(AstNode::from_sexpr(s).unwrap())
    }

    #[test]
    fn sorted_with_pad_and_unk() {
        let v = Vocabulary::build([&tree("(b (a))")]).unwrap();
        assert_eq!(v.lookup("a"), 1);
        assert_eq!(v.lookup("b"), 2);
        assert_eq!(v.unk_index(), 3);
        assert_eq!(v.size(), 4);
        assert_eq!(v.kind(0), Some(PAD_TOKEN));
        assert_eq!(v.kind(3), Some(UNK_TOKEN));
        assert_eq!(v.kind(4), None);
    }

    #[test]
    fn deterministic() {
        let corpus = [tree("(x (y) (z (y)))"), tree("(w)")];
        let a = Vocabulary::build(&corpus).unwrap();
        let b = Vocabulary::build(&corpus).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.hash(), b.hash());
    }

    #[test]
    fn unseen_kind_is_unk() {
        let v = Vocabulary::build([&tree("(a)")]).unwrap();
        assert_eq!(v.lookup("zzz_new"), v.unk_index());
    }

    #[test]
    fn empty_corpus_errors() {
        assert_eq!(
            Vocabulary::build(std::iter::empty()),
            Err(FrontendError::EmptyCorpus)
        );
    }

    #[test]
    fn serde_round_trip() {
        let v = Vocabulary::build([&tree("(b (a) (c))")]).unwrap();
        let json = serde_json::to_string(&v).unwrap();
        assert_eq!(json, r#"{"kinds":["a","b","c"]}"#);
        assert_eq!(serde_json::from_str::<Vocabulary>(&json).unwrap(), v);
    }

    proptest! {
        #[test]
        fn indices_are_a_bijection(trees in prop::collection::vec(arb_tree(), 1..5)) {
            let corpus: Vec<_> = trees.into_iter().map(UnifiedAst::raw).collect();
            let v = Vocabulary::build(&corpus).unwrap();
            let mut seen = std::collections::HashSet::new();
            for i in 0..v.size() {
                let k = v.kind(i).unwrap();
                prop_assert!(seen.insert(k.to_string()));
                if i != PAD_INDEX && i != v.unk_index() {
                    prop_assert_eq!(v.lookup(k), i);
                }
            }
            for ast in &corpus {
                for n in ast.root().preorder() {
                    let i = v.lookup(n.kind());
                    prop_assert!(i >= 1 && i < v.unk_index());
                }
            }
        }
    }
}
