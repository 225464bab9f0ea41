//! Turns one tree into model inputs: the padded pre-order kind sequence and
//! the degree-normalized adjacency of its first nodes.

use uast::featurize::featurize;
use uast::frontend::{AstNode, UnifiedAst, Vocabulary};

fn main() -> anyhow::Result<()> {
    let tree = UnifiedAst::raw(AstNode::from_sexpr(
        "(unit (function (params (id) (id)) (block (return (binary (id) (id))))))",
    )?);
    let vocab = Vocabulary::build([&tree])?;
    let features = featurize(&tree, &vocab, 12, 6);

    println!("vocabulary: {:?}", vocab.kinds());
    println!(
        "path (L = 12, {} real): {:?}",
        features.path.true_length, features.path.indices
    );
    let names: Vec<&str> = features
        .path
        .tokens()
        .iter()
        .map(|&i| vocab.kind(i).unwrap_or("?"))
        .collect();
    println!("           {names:?}");

    let g = &features.graph;
    println!(
        "\ngraph keeps {} of {} nodes, edges {:?}",
        g.node_count(),
        tree.root().node_count(),
        g.edges()
    );
    let adj = g.norm_adj_dense();
    for i in 0..g.node_count() {
        let row: Vec<String> = (0..g.node_count())
            .map(|j| format!("{:.3}", adj.get(i, j)))
            .collect();
        println!("  {}", row.join(" "));
    }
    Ok(())
}
