//! Trains the full model on the bundled 32-file toy corpus and writes the
//! checkpoint, history and reports.
//!
//! cargo run --release --example train_toy -- [uast|sast|gast] [out-dir]

use std::path::PathBuf;

use uast::dataset::SplitRatios;
use uast::frontend::GrammarRegistry;
use uast::pipeline::run_training;
use uast::run::{Profile, RunConfig};

fn main() -> anyhow::Result<()> {
    let mut args = std::env::args().skip(1);
    let mut run = RunConfig::for_profile(Profile::Toy);
    run.corpus = Some(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/toy"));
    run.model.mode = args
        .next()
        .as_deref()
        .unwrap_or("uast")
        .parse()
        .map_err(anyhow::Error::msg)?;
    run.out_dir = args
        .next()
        .map_or_else(|| std::env::temp_dir().join("uast-toy"), PathBuf::from);
    // All 32 files go to training: this run checks the model can fit them.
    run.split = SplitRatios([1, 0, 0]);

    let report = run_training(&run, &GrammarRegistry::with_builtin())?;
    for rec in report.history.iter().filter(|r| r.epoch % 10 == 0) {
        println!(
            "epoch {:3}  step {:4}  loss {:.4}  fit accuracy {:.3}",
            rec.epoch, rec.steps, rec.train_loss, rec.train_accuracy
        );
    }
    print!("\n{}", report.report_text());
    println!("\nartifacts in {}", run.out_dir.display());
    Ok(())
}
