//! Checks every parameter gradient of a tiny model against central finite
//! differences, in all three modes.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use uast::featurize::featurize;
use uast::frontend::{AstNode, UnifiedAst, Vocabulary};
use uast::model::{Mode, ModelConfig, UastModel};
use uast::tensor::check::{central_difference, max_relative_error};

fn main() -> anyhow::Result<()> {
    let vocab = Vocabulary::from_kinds(["a", "b", "c", "d", "e", "f", "g", "h"].map(String::from));
    let tree = UnifiedAst::raw(AstNode::from_sexpr("(a (b (c) (d)) (e (f)) (g))")?);
    let sample = featurize(&tree, &vocab, 6, 6);
    for mode in [Mode::Uast, Mode::Sast, Mode::Gast] {
        let config = ModelConfig {
            path_length: 6,
            graph_size: 6,
            embed_dim: 8,
            heads: 4,
            lstm_hidden: 4,
            gcn_hidden: 8,
            gcn_out: 4,
            num_classes: 3,
            vocab_size: vocab.size(),
            mode,
            ..Default::default()
        };
        let model = UastModel::new(config, &mut ChaCha8Rng::seed_from_u64(3))?;
        let rng = || ChaCha8Rng::seed_from_u64(0);
        let analytic = model.loss_and_grads(&sample, 2, false, &mut rng())?.grads;
        let numeric = central_difference(
            |tensors| {
                let mut probe = model.clone();
                probe.params.tensors_mut().clone_from_slice(tensors);
                probe
                    .loss_and_grads(&sample, 2, false, &mut rng())
                    .unwrap()
                    .loss
            },
            model.params.tensors(),
            1e-5,
        );
        println!(
            "{mode}: {} parameter tensors, max relative error {:.2e}",
            analytic.len(),
            max_relative_error(&analytic, &numeric)
        );
        for ((name, a), n) in model.params.names().iter().zip(&analytic).zip(&numeric) {
            println!(
                "  {name:<18} {:.2e}",
                max_relative_error(std::slice::from_ref(a), std::slice::from_ref(n))
            );
        }
    }
    Ok(())
}
