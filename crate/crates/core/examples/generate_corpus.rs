//! Writes a synthetic algorithm-classification corpus.
//!
//! cargo run --example generate_corpus -- <out-dir> [classes] [files-per-cell] [seed]

use std::path::PathBuf;

use uast::dataset::synth::{generate_corpus, SynthOptions};

fn main() -> anyhow::Result<()> {
    let mut args = std::env::args().skip(1);
    let root = PathBuf::from(args.next().unwrap_or_else(|| "synth-corpus".into()));
    let mut options = SynthOptions::default();
    if let Some(c) = args.next() {
        options.classes = c.parse()?;
    }
    if let Some(n) = args.next() {
        options.per_cell = n.parse()?;
    }
    if let Some(s) = args.next() {
        options.seed = s.parse()?;
    }
    let written = generate_corpus(&root, &options)?;
    println!("{} files under {}", written.len(), root.display());
    Ok(())
}
