//! Trains a small model, saves it, reloads the checkpoint and classifies
//! files with it.
//!
//! cargo run --release --example predict -- [files...]

use std::path::PathBuf;

use uast::checkpoint::Checkpoint;
use uast::dataset::SplitRatios;
use uast::frontend::GrammarRegistry;
use uast::pipeline::{predict_file, run_training};
use uast::run::{Profile, RunConfig};

fn main() -> anyhow::Result<()> {
    let toy = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/toy");
    let registry = GrammarRegistry::with_builtin();
    let mut run = RunConfig::for_profile(Profile::Toy);
    run.corpus = Some(toy.clone());
    run.split = SplitRatios([1, 0, 0]);
    run.out_dir = std::env::temp_dir().join("uast-predict");
    run_training(&run, &registry)?;

    let checkpoint = Checkpoint::load(&run.out_dir.join("checkpoint.uast"))?;
    let mut files: Vec<PathBuf> = std::env::args().skip(1).map(PathBuf::from).collect();
    if files.is_empty() {
        files = [
            "gcd/java/000.java",
            "bubble_sort/python/001.py",
            "factorial/java/002.java",
        ]
        .map(|f| toy.join(f))
        .to_vec();
    }
    for file in &files {
        let p = predict_file(&checkpoint, &registry, file, None)?;
        let probs: Vec<String> = p.probabilities.iter().map(|x| format!("{x:.3}")).collect();
        println!(
            "{:<40} {:<14} [{}]",
            file.display(),
            p.label_name,
            probs.join(" ")
        );
    }
    Ok(())
}
