use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use uast::checkpoint::{Checkpoint, CheckpointError};
use uast::dataset::{
    parse_file, CorpusFile, DatasetError, SourceFormat, SplitRatios, SEXPR_EXTENSIONS,
};
use uast::featurize::{read_feature_file, write_feature_file, FeatureFileError};
use uast::frontend::{FrontendError, GrammarRegistry, UnificationTable};
use uast::lang::Language;
use uast::model::{Activation, Mode, Pooling};
use uast::pipeline::{self, PipelineError, SplitSelection, SweepParam};
use uast::run::{Profile, RunConfig};

/// Cross-language program classification over unified syntax trees.
#[derive(Parser)]
#[command(name = "uast", version)]
struct Cli {
    /// More log output (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the syntax tree of each file as an S-expression.
    Parse {
        files: Vec<PathBuf>,
        /// Language of every file; otherwise taken from the extension.
        #[arg(long)]
        lang: Option<Language>,
        /// Keep the grammar's own node kinds.
        #[arg(long)]
        raw: bool,
        #[arg(long, env = "UAST_TABLE")]
        table: Option<PathBuf>,
    },
    /// Parse, split and featurize a corpus into a feature file.
    Featurize {
        #[command(flatten)]
        run: RunArgs,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Path-length distribution of a corpus.
    Stats {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        json: bool,
    },
    /// Train a model and write checkpoint, history and reports.
    Train {
        #[command(flatten)]
        run: RunArgs,
        /// Also print the full run configuration before training.
        #[arg(long)]
        show_config: bool,
    },
    /// Evaluate a checkpoint on a corpus split or a feature file.
    Eval {
        #[arg(short, long)]
        checkpoint: PathBuf,
        /// Corpus directory; defaults to the one the checkpoint was trained on.
        #[arg(long, conflicts_with = "features")]
        corpus: Option<PathBuf>,
        #[arg(long, conflicts_with = "features")]
        manifest: Option<PathBuf>,
        /// Feature file written by `featurize`.
        #[arg(long)]
        features: Option<PathBuf>,
        /// train, validation, test or all.
        #[arg(long, default_value = "test")]
        split: SplitSelection,
        #[arg(long)]
        json: bool,
    },
    /// Classify source files with a trained checkpoint.
    Predict {
        #[arg(short, long)]
        checkpoint: PathBuf,
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[arg(long)]
        lang: Option<Language>,
        #[arg(long)]
        json: bool,
    },
    /// Train one model per value of a hyperparameter.
    Sweep {
        #[command(flatten)]
        run: RunArgs,
        /// path-length or gcn-layers.
        #[arg(long)]
        param: SweepParam,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<usize>,
        /// Also write the table (TSV) here.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

/// Run configuration: a profile, then a JSON config file, then these flags.
#[derive(Args, Clone, Default)]
struct RunArgs {
    #[arg(long)]
    profile: Option<Profile>,
    #[arg(long)]
    config: Option<PathBuf>,
    /// Corpus laid out as <label>/<language>/<file>.
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// CSV of path,label[,language].
    #[arg(long)]
    manifest: Option<PathBuf>,
    #[arg(long, env = "UAST_TABLE")]
    table: Option<PathBuf>,
    #[arg(long)]
    no_unified_vocab: bool,
    /// Identifier to mask as XXX before parsing (repeatable).
    #[arg(long = "mask-name")]
    mask_names: Vec<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Train:validation:test ratios, e.g. 3,1,1.
    #[arg(long, value_delimiter = ',')]
    split: Option<Vec<usize>>,
    #[arg(long)]
    mode: Option<Mode>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    max_steps: Option<usize>,
    #[arg(long)]
    path_length: Option<usize>,
    #[arg(long)]
    graph_size: Option<usize>,
    #[arg(long)]
    gcn_layers: Option<usize>,
    #[arg(long)]
    activation: Option<Activation>,
    #[arg(long)]
    pooling: Option<Pooling>,
    /// Use learned query/key/value projections in self-attention.
    #[arg(long)]
    learned_projections: bool,
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

impl RunArgs {
    fn resolve(&self) -> Result<RunConfig, PipelineError> {
        let mut run = match &self.config {
            Some(path) => RunConfig::load(path).map_err(PipelineError::Config)?,
            None => RunConfig::for_profile(self.profile.unwrap_or_default()),
        };
        if let (Some(p), Some(_)) = (self.profile, &self.config) {
            if p != run.profile {
                return Err(PipelineError::Config(format!(
                    "--profile {p} conflicts with profile {} in the config file",
                    run.profile
                )));
            }
        }
        macro_rules! set {
            ($field:ident => $($target:tt)+) => {
                if let Some(v) = self.$field.clone() {
                    $($target)+ = v;
                }
            };
        }
        set!(seed => run.seed);
        set!(mode => run.model.mode);
        set!(epochs => run.train.epochs);
        set!(batch_size => run.train.batch_size);
        set!(lr => run.train.adam.lr);
        set!(path_length => run.model.path_length);
        set!(graph_size => run.model.graph_size);
        set!(gcn_layers => run.model.gcn_layers);
        set!(activation => run.model.gcn_activation);
        set!(pooling => run.model.pooling);
        set!(out_dir => run.out_dir);
        if let Some(r) = &self.split {
            let ratios: [usize; 3] = r.as_slice().try_into().map_err(|_| {
                PipelineError::Config("--split takes three comma-separated ratios".into())
            })?;
            run.split = SplitRatios(ratios);
        }
        if let Some(steps) = self.max_steps {
            run.train.max_steps = Some(steps);
        }
        if self.corpus.is_some() || self.manifest.is_some() {
            run.corpus = self.corpus.clone();
            run.manifest = self.manifest.clone();
        }
        if self.table.is_some() {
            run.table = self.table.clone();
        }
        if self.no_unified_vocab {
            run.unified_vocab = false;
        }
        if !self.mask_names.is_empty() {
            run.mask_names = self.mask_names.clone();
        }
        if self.learned_projections {
            run.model.learned_projections = true;
        }
        run.validate().map_err(PipelineError::Config)?;
        Ok(run)
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<PipelineError>() {
            return e.exit_code() as u8;
        }
        if cause.is::<DatasetError>()
            || cause.is::<FrontendError>()
            || cause.is::<CheckpointError>()
            || cause.is::<FeatureFileError>()
        {
            return 2;
        }
    }
    3
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn run(command: Command) -> Result<()> {
    let registry = GrammarRegistry::with_builtin();
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    match command {
        Command::Parse {
            files,
            lang,
            raw,
            table,
        } => {
            if files.is_empty() {
                return Err(PipelineError::Config("no input files".into()).into());
            }
            let table = match (raw, table) {
                (true, _) => None,
                (false, Some(path)) => Some(UnificationTable::load(&path)?),
                (false, None) => Some(UnificationTable::builtin()),
            };
            for path in &files {
                let file = read_source(path, lang)?;
                let ast = parse_file(&registry, table.as_ref(), &file)?;
                if files.len() > 1 {
                    writeln!(out, ";; {}", path.display())?;
                }
                writeln!(out, "{}", ast.root().to_sexpr())?;
            }
        }
        Command::Featurize { run, output } => {
            let run = run.resolve()?;
            let prepared = pipeline::prepare(&run, &registry)?;
            let file = prepared.feature_file(run.model.path_length, run.model.graph_size);
            let mut w = BufWriter::new(
                fs::File::create(&output).with_context(|| output.display().to_string())?,
            );
            write_feature_file(&mut w, &file)?;
            w.flush()?;
            let [tr, va, te] = prepared.split_sizes();
            eprintln!(
                "wrote {} records ({tr} train / {va} validation / {te} test, vocabulary {}) to {}",
                file.records.len(),
                file.vocab.size(),
                output.display()
            );
        }
        Command::Stats { run, json } => {
            let run = run.resolve()?;
            let stats = pipeline::corpus_stats(&run, &registry)?;
            if json {
                writeln!(out, "{}", serde_json::to_string_pretty(&stats)?)?;
            } else {
                let name = run
                    .corpus
                    .as_deref()
                    .or(run.manifest.as_deref())
                    .map_or("corpus".into(), short_name);
                write!(out, "{}", stats.render_table(&name))?;
            }
        }
        Command::Train { run, show_config } => {
            let run = run.resolve()?;
            if show_config {
                writeln!(out, "{}", run.to_json())?;
            }
            let report = pipeline::run_training(&run, &registry)?;
            write!(out, "{}", report.report_text())?;
            writeln!(out, "\nartifacts written to {}", run.out_dir.display())?;
        }
        Command::Eval {
            checkpoint,
            corpus,
            manifest,
            features,
            split,
            json,
        } => {
            let ckpt = Checkpoint::load(&checkpoint)?;
            let examples = match features {
                Some(path) => {
                    let bytes = fs::read(&path).with_context(|| path.display().to_string())?;
                    let file = read_feature_file(&mut bytes.as_slice())?;
                    pipeline::feature_file_examples(&ckpt, &file, split)?
                }
                None => pipeline::checkpoint_examples(
                    &ckpt,
                    &registry,
                    corpus.as_deref(),
                    manifest.as_deref(),
                    split,
                )?,
            };
            let report = pipeline::evaluate_checkpoint(&ckpt, &examples)?;
            if json {
                let doc = serde_json::json!({ "run": ckpt.run, "labels": ckpt.labels, "metrics": report });
                writeln!(out, "{}", serde_json::to_string_pretty(&doc)?)?;
            } else {
                writeln!(
                    out,
                    "mode {}  seed {}  {} samples",
                    ckpt.run.model.mode,
                    ckpt.run.seed,
                    examples.len()
                )?;
                write!(out, "{}", report.render_table(&ckpt.labels))?;
            }
        }
        Command::Predict {
            checkpoint,
            files,
            lang,
            json,
        } => {
            let ckpt = Checkpoint::load(&checkpoint)?;
            for path in &files {
                let p = pipeline::predict_file(&ckpt, &registry, path, lang)?;
                if json {
                    let doc = serde_json::json!({ "file": path, "prediction": p });
                    writeln!(out, "{}", serde_json::to_string(&doc)?)?;
                } else {
                    let probs: Vec<String> =
                        p.probabilities.iter().map(|x| format!("{x:.4}")).collect();
                    writeln!(
                        out,
                        "{}\t{}\t[{}]",
                        path.display(),
                        p.label_name,
                        probs.join(", ")
                    )?;
                }
            }
        }
        Command::Sweep {
            run,
            param,
            values,
            output,
        } => {
            if values.is_empty() {
                bail!(PipelineError::Config(
                    "sweep needs at least one value".into()
                ));
            }
            let run = run.resolve()?;
            let report = pipeline::sweep(&run, &registry, param, &values)?;
            let table = report.to_tsv();
            write!(out, "{table}")?;
            if let Some(path) = output {
                fs::write(&path, &table).with_context(|| path.display().to_string())?;
            }
        }
    }
    out.flush()?;
    Ok(())
}

fn short_name(path: &Path) -> String {
    path.file_name().map_or_else(
        || path.display().to_string(),
        |n| n.to_string_lossy().into_owned(),
    )
}

fn read_source(path: &Path, lang: Option<Language>) -> Result<CorpusFile> {
    let id = path.display().to_string();
    let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
    let format = if SEXPR_EXTENSIONS.contains(&ext) {
        SourceFormat::Sexpr
    } else {
        SourceFormat::Code
    };
    let language = match lang.or_else(|| Language::from_path(path)) {
        Some(l) => l,
        None => return Err(DatasetError::UnknownExtension(id).into()),
    };
    let text = fs::read_to_string(path).map_err(|e| DatasetError::Io {
        path: id.clone(),
        reason: e.to_string(),
    })?;
    Ok(CorpusFile {
        path: path.to_path_buf(),
        id,
        label: 0,
        language,
        format,
        text,
    })
}
