//! Trains one model per number of graph-convolution layers on a generated
//! corpus and prints a plot-ready table.
//!
//! cargo run --release --example sweep

use uast::dataset::synth::{generate_corpus, SynthOptions};
use uast::frontend::GrammarRegistry;
use uast::pipeline::{sweep, SweepParam};
use uast::run::{Profile, RunConfig};

fn main() -> anyhow::Result<()> {
    let dir = std::env::temp_dir().join("uast-sweep-corpus");
    if !dir.exists() {
        generate_corpus(
            &dir,
            &SynthOptions {
                per_cell: 20,
                ..Default::default()
            },
        )?;
    }
    let mut run = RunConfig::for_profile(Profile::Toy);
    run.corpus = Some(dir);
    run.train.epochs = 10;
    let report = sweep(
        &run,
        &GrammarRegistry::with_builtin(),
        SweepParam::GcnLayers,
        &[1, 2, 3],
    )?;
    println!("metrics on the {} split", report.split);
    print!("{}", report.to_tsv());
    Ok(())
}
