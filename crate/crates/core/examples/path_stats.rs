//! Pre-order path length distribution of a corpus (defaults to the bundled
//! toy corpus): the numbers used to pick the path length.
//!
//! cargo run --example path_stats -- [corpus-dir]

use std::path::PathBuf;

use uast::frontend::GrammarRegistry;
use uast::pipeline::corpus_stats;
use uast::run::{Profile, RunConfig};

fn main() -> anyhow::Result<()> {
    let corpus = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/toy"));
    let mut run = RunConfig::for_profile(Profile::Toy);
    run.corpus = Some(corpus.clone());
    let stats = corpus_stats(&run, &GrammarRegistry::with_builtin())?;
    println!("{} files, {} classes", stats.files, stats.classes);
    print!(
        "{}",
        stats.render_table(&corpus.file_name().unwrap_or_default().to_string_lossy())
    );
    Ok(())
}
