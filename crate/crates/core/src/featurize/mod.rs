//! Model inputs derived from a unified AST: the padded pre-order path and
//! the degree-normalized graph.

mod file;
mod stats;

pub use file::{
    read_feature_file, write_feature_file, FeatureFile, FeatureFileError, FeatureRecord,
};
pub use stats::{nearest_rank, path_length_stats, LengthStats};

use std::sync::Arc;

use crate::frontend::{UnifiedAst, Vocabulary, PAD_INDEX};
use crate::tensor::{SparseMatrix, Tensor};

/// Pre-order kind indices, padded with 0 or truncated to a fixed length.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PathSequence {
    pub indices: Vec<usize>,
    pub true_length: usize,
}

impl PathSequence {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// The unpadded prefix.
    pub fn tokens(&self) -> &[usize] {
        &self.indices[..self.true_length]
    }
}

/// AST as an undirected graph over at most `size` pre-order nodes.
///
/// `norm_adj` holds `D^-1/2 (A + I) D^-1/2` restricted to the real nodes;
/// every entry outside the leading `node_count x node_count` block of the
/// `size x size` matrix is zero.
#[derive(Clone, Debug, PartialEq)]
pub struct GraphSample {
    size: usize,
    node_kinds: Vec<usize>,
    node_count: usize,
    edges: Vec<(usize, usize)>,
    norm_adj: Arc<SparseMatrix>,
}

impl GraphSample {
    /// Rebuilds the normalized adjacency from a parent-child edge list.
    ///
    /// `node_kinds` lists the real nodes; it is padded to `size` here.
    pub fn from_edges(
        size: usize,
        mut node_kinds: Vec<usize>,
        edges: Vec<(usize, usize)>,
    ) -> Result<Self, String> {
        let n = node_kinds.len();
        if n == 0 || n > size {
            return Err(format!("{n} nodes for graph size {size}"));
        }
        if let Some(&(a, b)) = edges.iter().find(|(a, b)| *a >= n || *b >= n || a == b) {
            return Err(format!("edge ({a}, {b}) invalid for {n} nodes"));
        }
        let mut degree = vec![1usize; n];
        for &(a, b) in &edges {
            degree[a] += 1;
            degree[b] += 1;
        }
        let weight = |i: usize, j: usize| 1.0 / ((degree[i] as f64) * (degree[j] as f64)).sqrt();
        let mut triplets = Vec::with_capacity(n + 2 * edges.len());
        for i in 0..n {
            triplets.push((i, i, weight(i, i)));
        }
        for &(a, b) in &edges {
            triplets.push((a, b, weight(a, b)));
            triplets.push((b, a, weight(b, a)));
        }
        let norm_adj = SparseMatrix::from_triplets(n, n, triplets).map_err(|e| e.to_string())?;
        node_kinds.resize(size, PAD_INDEX);
        Ok(Self {
            size,
            node_kinds,
            node_count: n,
            edges,
            norm_adj: Arc::new(norm_adj),
        })
    }

    /// Matrix dimension `N`.
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    /// Kind index per node, `PAD` beyond `node_count`; length `size`.
    pub fn node_kinds(&self) -> &[usize] {
        &self.node_kinds
    }

    /// Undirected parent-child edges in pre-order numbering.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Normalized adjacency over the real nodes only.
    pub fn norm_adj(&self) -> &Arc<SparseMatrix> {
        &self.norm_adj
    }

    pub fn norm_adj_entry(&self, i: usize, j: usize) -> f64 {
        if i < self.node_count && j < self.node_count {
            self.norm_adj.get(i, j)
        } else {
            0.0
        }
    }

    /// Full `size x size` matrix.
    pub fn norm_adj_dense(&self) -> Tensor {
        let mut t = Tensor::zeros(&[self.size, self.size]);
        for i in 0..self.node_count {
            for (j, v) in self.norm_adj.row_entries(i) {
                t.set(i, j, v);
            }
        }
        t
    }
}

/// Both model inputs for one tree.
#[derive(Clone, Debug, PartialEq)]
pub struct Features {
    pub path: PathSequence,
    pub graph: GraphSample,
}

/// Visits the root, then each subtree left to right; pads with 0 or
/// truncates to `length`.
pub fn preorder_path(ast: &UnifiedAst, vocab: &Vocabulary, length: usize) -> PathSequence {
    assert!(length >= 1, "path length must be at least 1");
    let mut indices: Vec<usize> = ast
        .root()
        .preorder()
        .take(length)
        .map(|n| vocab.lookup(n.kind()))
        .collect();
    let true_length = indices.len();
    indices.resize(length, PAD_INDEX);
    PathSequence {
        indices,
        true_length,
    }
}

/// Keeps the first `size` pre-order nodes with their parent-child edges and
/// precomputes the normalized adjacency.
pub fn build_graph(ast: &UnifiedAst, vocab: &Vocabulary, size: usize) -> GraphSample {
    assert!(size >= 1, "graph size must be at least 1");
    let nodes = ast.root().preorder_with_parents();
    let kept = nodes.len().min(size);
    let kinds = nodes[..kept]
        .iter()
        .map(|(n, _)| vocab.lookup(n.kind()))
        .collect();
    let edges = nodes[..kept]
        .iter()
        .enumerate()
        .filter_map(|(i, (_, parent))| parent.map(|p| (p, i)))
        .collect();
    GraphSample::from_edges(size, kinds, edges).expect("pre-order edges are valid")
}

pub fn featurize(
    ast: &UnifiedAst,
    vocab: &Vocabulary,
    path_length: usize,
    graph_size: usize,
) -> Features {
    Features {
        path: preorder_path(ast, vocab, path_length),
        graph: build_graph(ast, vocab, graph_size),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::AstNode;

    fn ast(s: &str) -> UnifiedAst {
        UnifiedAst::raw(AstNode::from_sexpr(s).unwrap())
    }

    fn abc_vocab() -> Vocabulary {
        Vocabulary::from_kinds(["a", "b", "c", "d"].map(String::from))
    }

    #[test]
    fn pads_short_paths() {
        let p = preorder_path(&ast("(a (b) (c))"), &abc_vocab(), 5);
        assert_eq!(p.indices, vec![1, 2, 3, 0, 0]);
        assert_eq!(p.true_length, 3);
        assert_eq!(p.tokens(), &[1, 2, 3]);
    }

    #[test]
    fn truncates_long_paths() {
        let v = abc_vocab();
        let p = preorder_path(&ast("(a (b (d)) (c))"), &v, 3);
        assert_eq!(p.indices, vec![v.lookup("a"), v.lookup("b"), v.lookup("d")]);
        assert_eq!(p.true_length, 3);
    }

    #[test]
    fn single_node_path() {
        let p = preorder_path(&ast("(c)"), &abc_vocab(), 1);
        assert_eq!(p.indices, vec![3]);
        assert_eq!(p.true_length, 1);
    }

    #[test]
    fn unknown_kinds_use_unk() {
        let v = abc_vocab();
        let p = preorder_path(&ast("(a (zz))"), &v, 2);
        assert_eq!(p.indices, vec![1, v.unk_index()]);
    }

    #[test]
    fn single_node_graph_is_identity() {
        let g = build_graph(&ast("(a)"), &abc_vocab(), 4);
        assert_eq!(g.norm_adj_entry(0, 0), 1.0);
        assert_eq!(g.node_count(), 1);
        assert_eq!(g.node_kinds(), &[1, 0, 0, 0]);
    }

    #[test]
    fn two_node_graph_is_all_halves() {
        let g = build_graph(&ast("(a (b))"), &abc_vocab(), 2);
        let d = g.norm_adj_dense();
        assert_eq!(d.data(), &[0.5, 0.5, 0.5, 0.5]);
    }

    #[test]
    fn three_node_path_graph() {
        // a - b - c as a chain: degrees in A + I are (2, 3, 2).
        let g = build_graph(&ast("(a (b (c)))"), &abc_vocab(), 3);
        assert_eq!(g.norm_adj_entry(0, 0), 0.5);
        assert_eq!(g.norm_adj_entry(0, 1), 1.0 / 6f64.sqrt());
        assert_eq!(g.norm_adj_entry(1, 1), 1.0 / 3.0);
        assert_eq!(g.norm_adj_entry(0, 2), 0.0);
        assert_eq!(g.norm_adj_entry(1, 2), g.norm_adj_entry(2, 1));
    }

    #[test]
    fn graph_truncation_keeps_first_preorder_nodes() {
        let v = abc_vocab();
        let g = build_graph(&ast("(a (b (d)) (c))"), &v, 3);
        assert_eq!(g.node_count(), 3);
        assert_eq!(
            g.node_kinds(),
            &[v.lookup("a"), v.lookup("b"), v.lookup("d")]
        );
        assert_eq!(g.edges(), &[(0, 1), (1, 2)]);
        let dense = g.norm_adj_dense();
        assert_eq!(dense.shape(), &[3, 3]);
    }

    #[test]
    fn padded_rows_are_zero() {
        let g = build_graph(&ast("(a (b))"), &abc_vocab(), 4);
        let d = g.norm_adj_dense();
        for i in 0..4 {
            for j in 0..4 {
                if i >= 2 || j >= 2 {
                    assert_eq!(d.get(i, j), 0.0);
                }
            }
        }
    }

    #[test]
    fn from_edges_validates() {
        assert!(GraphSample::from_edges(2, vec![1, 2, 3], vec![]).is_err());
        assert!(GraphSample::from_edges(3, vec![1, 2], vec![(0, 2)]).is_err());
        assert!(GraphSample::from_edges(3, vec![], vec![]).is_err());
    }

    mod props {
        use super::*;
        use crate::frontend::ast::tests::arb_tree;
        use proptest::prelude::*;

        fn vocab_for(t: &AstNode) -> Vocabulary {
            // drop one kind so UNK shows up too
            let mut kinds: Vec<String> = t.preorder().map(|n| n.kind().to_string()).collect();
            kinds.sort();
            kinds.dedup();
            if kinds.len() > 1 {
                kinds.pop();
            }
            Vocabulary::from_kinds(kinds)
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(300))]

            #[test]
            fn norm_adj_matches_brute_force(t in arb_tree(), n in 1usize..40) {
                let v = vocab_for(&t);
                let g = build_graph(&UnifiedAst::raw(t.clone()), &v, n);
                let m = g.node_count();
                let mut a = vec![vec![0.0f64; m]; m];
                let parents = t.preorder_with_parents();
                for i in 0..m {
                    a[i][i] = 1.0;
                    if let Some(p) = parents[i].1 {
                        a[p][i] = 1.0;
                        a[i][p] = 1.0;
                    }
                }
                let d: Vec<f64> = a.iter().map(|r| r.iter().sum()).collect();
                let dense = g.norm_adj_dense();
                for i in 0..n {
                    for j in 0..n {
                        let want = if i < m && j < m { a[i][j] / (d[i] * d[j]).sqrt() } else { 0.0 };
                        prop_assert_eq!(dense.get(i, j), want);
                        prop_assert_eq!(dense.get(i, j), dense.get(j, i));
                    }
                }
            }

            #[test]
            fn path_and_graph_agree(t in arb_tree(), l in 1usize..40, n in 1usize..40) {
                let v = vocab_for(&t);
                let ast = UnifiedAst::raw(t.clone());
                let f = featurize(&ast, &v, l, n);
                let count = t.node_count();
                prop_assert_eq!(f.path.indices.len(), l);
                prop_assert_eq!(f.path.true_length, count.min(l));
                prop_assert!(f.path.indices[f.path.true_length..].iter().all(|&i| i == PAD_INDEX));
                prop_assert!(f.path.tokens().iter().all(|&i| i != PAD_INDEX));
                prop_assert_eq!(f.graph.node_count(), count.min(n));
                prop_assert_eq!(f.graph.node_kinds().len(), n);
                for i in 0..f.path.true_length.min(n) {
                    prop_assert_eq!(f.path.indices[i], f.graph.node_kinds()[i]);
                }
            }
        }
    }
}
