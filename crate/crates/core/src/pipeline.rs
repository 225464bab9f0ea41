//! End-to-end operations shared by the command-line tool and the examples:
//! corpus to features, training runs, evaluation, prediction and sweeps.

use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::checkpoint::{Checkpoint, CheckpointError, TrainingMeta};
use crate::dataset::{
    ingest_corpus, parse_corpus, parse_file, split_dataset, Corpus, CorpusFile, DatasetError,
    IngestOptions, SourceFormat, Split,
};
use crate::featurize::{featurize, path_length_stats, FeatureFile, FeatureRecord, LengthStats};
use crate::frontend::{FrontendError, GrammarRegistry, UnificationTable, UnifiedAst, Vocabulary};
use crate::lang::Language;
use crate::metrics::{MetricsError, MetricsReport};
use crate::model::{ModelError, UastModel};
use crate::run::RunConfig;
use crate::tensor::Tensor;
use crate::train::{evaluate, train, EpochRecord, Example, TrainError, TrainOutcome};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const CHECKPOINT_FILE: &str = "checkpoint.uast";
pub const HISTORY_FILE: &str = "history.jsonl";
pub const REPORT_FILE: &str = "report.json";
pub const REPORT_TEXT_FILE: &str = "report.txt";

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Frontend(#[from] FrontendError),
    #[error(transparent)]
    Checkpoint(#[from] CheckpointError),
    #[error("{what} mismatch: checkpoint has {expected}, data has {found}")]
    Mismatch {
        what: &'static str,
        expected: String,
        found: String,
    },
    #[error("{0} split is empty")]
    EmptySplit(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Train(#[from] TrainError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("{path}: {reason}")]
    Io { path: String, reason: String },
}

impl PipelineError {
    /// 1 for bad usage, 2 for bad input data, 3 for failures while running.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Config(_) => 1,
            PipelineError::Dataset(_)
            | PipelineError::Frontend(_)
            | PipelineError::Checkpoint(_)
            | PipelineError::Mismatch { .. }
            | PipelineError::EmptySplit(_)
            | PipelineError::Metrics(_) => 2,
            PipelineError::Train(TrainError::Metrics(_) | TrainError::EmptyTrainingSet) => 2,
            PipelineError::Model(
                ModelError::FeatureShape { .. } | ModelError::IndexOutOfVocab { .. },
            ) => 2,
            PipelineError::Model(ModelError::InvalidConfig(_)) => 1,
            PipelineError::Model(_) | PipelineError::Train(_) | PipelineError::Io { .. } => 3,
        }
    }
}

fn io_error(path: &Path, e: impl fmt::Display) -> PipelineError {
    PipelineError::Io {
        path: path.display().to_string(),
        reason: e.to_string(),
    }
}

/// The configured unification table, or `None` for raw grammar kinds.
pub fn load_table(run: &RunConfig) -> Result<Option<UnificationTable>, PipelineError> {
    if !run.unified_vocab {
        return Ok(None);
    }
    Ok(Some(match &run.table {
        Some(path) => UnificationTable::load(path)?,
        None => UnificationTable::builtin(),
    }))
}

/// A parsed, split corpus with the vocabulary of its training split.
#[derive(Clone, Debug)]
pub struct Prepared {
    pub corpus: Corpus,
    pub asts: Vec<UnifiedAst>,
    pub splits: Vec<Split>,
    pub vocab: Vocabulary,
    pub table: Option<UnificationTable>,
}

impl Prepared {
    pub fn indices(&self, split: Split) -> Vec<usize> {
        (0..self.splits.len())
            .filter(|&i| self.splits[i] == split)
            .collect()
    }

    pub fn split_sizes(&self) -> [usize; 3] {
        Split::ALL.map(|s| self.splits.iter().filter(|&&x| x == s).count())
    }

    /// Features for every file, in corpus order.
    pub fn featurize_all(&self, path_length: usize, graph_size: usize) -> Vec<Example> {
        self.asts
            .iter()
            .zip(&self.corpus.files)
            .map(|(ast, f)| Example {
                features: featurize(ast, &self.vocab, path_length, graph_size),
                label: f.label,
            })
            .collect()
    }

    pub fn feature_file(&self, path_length: usize, graph_size: usize) -> FeatureFile {
        let records = self
            .featurize_all(path_length, graph_size)
            .into_iter()
            .zip(&self.corpus.files)
            .zip(&self.splits)
            .map(|((ex, f), &split)| FeatureRecord {
                path: f.id.clone(),
                label: ex.label,
                language: f.language,
                split: Some(split),
                features: ex.features,
            })
            .collect();
        FeatureFile {
            path_length,
            graph_size,
            vocab: self.vocab.clone(),
            labels: self.corpus.labels.clone(),
            records,
        }
    }
}

/// Ingests, parses and splits the corpus named by `run`.
///
/// The vocabulary is built from training-split trees only; kinds first seen
/// in validation or test map to UNK.
pub fn prepare(run: &RunConfig, registry: &GrammarRegistry) -> Result<Prepared, PipelineError> {
    let table = load_table(run)?;
    let options = IngestOptions {
        mask_names: run.mask_names.clone(),
    };
    let corpus = ingest_corpus(run.corpus.as_deref(), run.manifest.as_deref(), &options)?;
    let asts = parse_corpus(registry, table.as_ref(), &corpus)?;
    let languages: Vec<Language> = corpus.files.iter().map(|f| f.language).collect();
    let splits = split_dataset(&languages, run.split, run.seed);
    let train_trees = asts
        .iter()
        .zip(&splits)
        .filter(|(_, s)| **s == Split::Train)
        .map(|(a, _)| a);
    let vocab =
        Vocabulary::build(train_trees).map_err(|_| PipelineError::EmptySplit("train".into()))?;
    log::info!(
        "{} files, {} classes, {} duplicates dropped, vocabulary of {}",
        corpus.len(),
        corpus.num_classes(),
        corpus.duplicates.len(),
        vocab.size()
    );
    Ok(Prepared {
        corpus,
        asts,
        splits,
        vocab,
        table,
    })
}

/// Featurized corpora keyed by `(path length, graph size, vocabulary hash)`.
#[derive(Default)]
pub struct FeatureCache {
    entries: HashMap<(usize, usize, String), Vec<Example>>,
}

impl FeatureCache {
    pub fn get_or_build(
        &mut self,
        prepared: &Prepared,
        path_length: usize,
        graph_size: usize,
    ) -> &[Example] {
        self.entries
            .entry((path_length, graph_size, prepared.vocab.hash()))
            .or_insert_with(|| prepared.featurize_all(path_length, graph_size))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Everything one training run produces.
#[derive(Clone, Debug)]
pub struct TrainReport {
    pub checkpoint: Checkpoint,
    pub history: Vec<EpochRecord>,
    pub step_losses: Vec<f64>,
    /// Eval-mode metrics of the stored parameters on the training split.
    pub train: MetricsReport,
    pub validation: Option<MetricsReport>,
    pub test: Option<MetricsReport>,
}

fn subset(all: &[Example], idx: &[usize]) -> Vec<Example> {
    idx.iter().map(|&i| all[i].clone()).collect()
}

/// Trains on an already prepared corpus. Nothing is written to disk.
pub fn train_prepared(
    run: &RunConfig,
    prepared: &Prepared,
    cache: &mut FeatureCache,
) -> Result<TrainReport, PipelineError> {
    let mut config = run.model.clone();
    config.num_classes = prepared.corpus.num_classes();
    config.vocab_size = prepared.vocab.size();
    config
        .validate()
        .map_err(|e| PipelineError::Config(e.to_string()))?;

    let all = cache.get_or_build(prepared, config.path_length, config.graph_size);
    let train_set = subset(all, &prepared.indices(Split::Train));
    let val_set = subset(all, &prepared.indices(Split::Validation));
    let test_set = subset(all, &prepared.indices(Split::Test));
    if train_set.is_empty() {
        return Err(PipelineError::EmptySplit("train".into()));
    }

    let mut init_rng = ChaCha8Rng::seed_from_u64(run.seed);
    let mut model = UastModel::new(config, &mut init_rng)?;
    log::info!(
        "training {} ({} parameters) on {} / {} / {} samples",
        model.config.mode,
        model.params.scalar_count(),
        train_set.len(),
        val_set.len(),
        test_set.len()
    );
    let mut train_config = run.train.clone();
    train_config.seed = run.seed;
    let TrainOutcome {
        best,
        best_epoch,
        history,
        step_losses,
        steps,
    } = train(&mut model, &train_set, &val_set, &train_config, |_, _| {})?;

    let train_metrics = evaluate(&best, &train_set)?;
    let validation = if val_set.is_empty() {
        None
    } else {
        Some(evaluate(&best, &val_set)?)
    };
    let test = if test_set.is_empty() {
        None
    } else {
        Some(evaluate(&best, &test_set)?)
    };
    let mut stored_run = run.clone();
    stored_run.model = best.config.clone();
    let checkpoint = Checkpoint {
        run: stored_run,
        model: best,
        vocab: prepared.vocab.clone(),
        labels: prepared.corpus.labels.clone(),
        table: prepared.table.clone(),
        meta: TrainingMeta {
            seed: run.seed,
            epoch: best_epoch,
            steps,
            best_val_accuracy: validation.as_ref().map(|m| m.accuracy),
        },
    };
    Ok(TrainReport {
        checkpoint,
        history,
        step_losses,
        train: train_metrics,
        validation,
        test,
    })
}

#[derive(Serialize)]
struct HistoryHeader<'a> {
    run: &'a RunConfig,
}

#[derive(Serialize)]
struct ReportDoc<'a> {
    run: &'a RunConfig,
    labels: &'a [String],
    best_epoch: usize,
    steps: usize,
    train: &'a MetricsReport,
    validation: Option<&'a MetricsReport>,
    test: Option<&'a MetricsReport>,
}

impl TrainReport {
    /// JSON lines: the run configuration, then one record per epoch.
    pub fn history_jsonl(&self) -> String {
        let mut out = serde_json::to_string(&HistoryHeader {
            run: &self.checkpoint.run,
        })
        .expect("serializes");
        out.push('\n');
        for rec in &self.history {
            out.push_str(&serde_json::to_string(rec).expect("serializes"));
            out.push('\n');
        }
        out
    }

    pub fn report_json(&self) -> String {
        serde_json::to_string_pretty(&ReportDoc {
            run: &self.checkpoint.run,
            labels: &self.checkpoint.labels,
            best_epoch: self.checkpoint.meta.epoch,
            steps: self.checkpoint.meta.steps,
            train: &self.train,
            validation: self.validation.as_ref(),
            test: self.test.as_ref(),
        })
        .expect("serializes")
    }

    /// Human-readable summary of every evaluated split.
    pub fn report_text(&self) -> String {
        let run = &self.checkpoint.run;
        let mut out = format!(
            "mode {}  seed {}  best epoch {}  steps {}\n",
            run.model.mode, run.seed, self.checkpoint.meta.epoch, self.checkpoint.meta.steps
        );
        let splits = [
            ("train", Some(&self.train)),
            ("validation", self.validation.as_ref()),
            ("test", self.test.as_ref()),
        ];
        for (name, metrics) in splits {
            if let Some(m) = metrics {
                out.push_str(&format!(
                    "\n[{name}]\n{}",
                    m.render_table(&self.checkpoint.labels)
                ));
            }
        }
        out
    }

    /// Writes checkpoint, history and reports into `dir`.
    pub fn write(&self, dir: &Path) -> Result<(), PipelineError> {
        fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
        self.checkpoint.save(&dir.join(CHECKPOINT_FILE))?;
        let files = [
            (HISTORY_FILE, self.history_jsonl()),
            (REPORT_FILE, self.report_json()),
            (REPORT_TEXT_FILE, self.report_text()),
        ];
        for (name, body) in files {
            let path = dir.join(name);
            fs::write(&path, body).map_err(|e| io_error(&path, e))?;
        }
        Ok(())
    }
}

/// Prepares the corpus, trains, and writes artifacts to `run.out_dir`.
pub fn run_training(
    run: &RunConfig,
    registry: &GrammarRegistry,
) -> Result<TrainReport, PipelineError> {
    run.validate().map_err(PipelineError::Config)?;
    let prepared = prepare(run, registry)?;
    let report = train_prepared(run, &prepared, &mut FeatureCache::default())?;
    report.write(&run.out_dir)?;
    Ok(report)
}

/// Which part of a corpus to evaluate on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SplitSelection {
    One(Split),
    All,
}

impl FromStr for SplitSelection {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("all") {
            Ok(SplitSelection::All)
        } else {
            s.parse().map(SplitSelection::One)
        }
    }
}

/// Parses a corpus the way the checkpoint's run did and featurizes it with
/// the checkpoint's vocabulary. With `corpus`/`manifest` unset the run's own
/// corpus is used; splits are recomputed from the run's seed.
pub fn checkpoint_examples(
    checkpoint: &Checkpoint,
    registry: &GrammarRegistry,
    corpus: Option<&Path>,
    manifest: Option<&Path>,
    selection: SplitSelection,
) -> Result<Vec<Example>, PipelineError> {
    let run = &checkpoint.run;
    let (root, manifest) = if corpus.is_some() || manifest.is_some() {
        (corpus, manifest)
    } else {
        (run.corpus.as_deref(), run.manifest.as_deref())
    };
    let options = IngestOptions {
        mask_names: run.mask_names.clone(),
    };
    let data = ingest_corpus(root, manifest, &options)?;
    if data.labels != checkpoint.labels {
        return Err(PipelineError::Mismatch {
            what: "label set",
            expected: checkpoint.labels.join(","),
            found: data.labels.join(","),
        });
    }
    let asts = parse_corpus(registry, checkpoint.table.as_ref(), &data)?;
    let languages: Vec<Language> = data.files.iter().map(|f| f.language).collect();
    let splits = split_dataset(&languages, run.split, run.seed);
    let cfg = &checkpoint.model.config;
    let examples: Vec<Example> = asts
        .iter()
        .zip(&data.files)
        .zip(&splits)
        .filter(|(_, s)| selection == SplitSelection::All || selection == SplitSelection::One(**s))
        .map(|((ast, f), _)| Example {
            features: featurize(ast, &checkpoint.vocab, cfg.path_length, cfg.graph_size),
            label: f.label,
        })
        .collect();
    if examples.is_empty() {
        return Err(PipelineError::EmptySplit(match selection {
            SplitSelection::All => "selected".into(),
            SplitSelection::One(s) => s.to_string(),
        }));
    }
    Ok(examples)
}

/// Examples from a feature file, after checking it matches the checkpoint.
pub fn feature_file_examples(
    checkpoint: &Checkpoint,
    file: &FeatureFile,
    selection: SplitSelection,
) -> Result<Vec<Example>, PipelineError> {
    let (want, got) = (checkpoint.vocab.hash(), file.vocab.hash());
    if want != got {
        return Err(PipelineError::Mismatch {
            what: "vocabulary hash",
            expected: want,
            found: got,
        });
    }
    if file.labels != checkpoint.labels {
        return Err(PipelineError::Mismatch {
            what: "label set",
            expected: checkpoint.labels.join(","),
            found: file.labels.join(","),
        });
    }
    let examples: Vec<Example> = file
        .records
        .iter()
        .filter(|r| match selection {
            SplitSelection::All => true,
            SplitSelection::One(s) => r.split == Some(s),
        })
        .map(|r| Example {
            features: r.features.clone(),
            label: r.label,
        })
        .collect();
    if examples.is_empty() {
        return Err(PipelineError::EmptySplit("selected".into()));
    }
    Ok(examples)
}

pub fn evaluate_checkpoint(
    checkpoint: &Checkpoint,
    examples: &[Example],
) -> Result<MetricsReport, PipelineError> {
    Ok(evaluate(&checkpoint.model, examples)?)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Prediction {
    pub label: usize,
    pub label_name: String,
    pub probabilities: Vec<f64>,
}

/// Classifies one source (or `.sexp`) file in evaluation mode.
pub fn predict_file(
    checkpoint: &Checkpoint,
    registry: &GrammarRegistry,
    path: &Path,
    language: Option<Language>,
) -> Result<Prediction, PipelineError> {
    let id = path.display().to_string();
    let format = if crate::dataset::SEXPR_EXTENSIONS
        .iter()
        .any(|e| path.extension().is_some_and(|x| x == *e))
    {
        SourceFormat::Sexpr
    } else {
        SourceFormat::Code
    };
    let language = language
        .or_else(|| Language::from_path(path))
        .ok_or_else(|| DatasetError::UnknownExtension(id.clone()))?;
    let bytes = fs::read(path).map_err(|e| io_error(path, e))?;
    let text = crate::dataset::mask_identifiers(
        &String::from_utf8_lossy(&bytes),
        &checkpoint.run.mask_names,
    );
    let file = CorpusFile {
        path: PathBuf::from(path),
        id,
        label: 0,
        language,
        format,
        text,
    };
    let ast = parse_file(registry, checkpoint.table.as_ref(), &file)?;
    let cfg = &checkpoint.model.config;
    let features = featurize(&ast, &checkpoint.vocab, cfg.path_length, cfg.graph_size);
    let probabilities = checkpoint.model.predict_proba(&features)?;
    let label = Tensor::vector(probabilities.clone()).argmax();
    Ok(Prediction {
        label,
        label_name: checkpoint.labels[label].clone(),
        probabilities,
    })
}

/// Hyperparameter varied by a sweep.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepParam {
    PathLength,
    GcnLayers,
}

impl FromStr for SweepParam {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "path-length" | "path_length" | "L" => Ok(SweepParam::PathLength),
            "gcn-layers" | "gcn_layers" => Ok(SweepParam::GcnLayers),
            other => Err(format!(
                "unknown sweep parameter '{other}' (expected path-length or gcn-layers)"
            )),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub value: usize,
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepReport {
    pub run: RunConfig,
    pub param: SweepParam,
    /// Split the metrics were measured on.
    pub split: Split,
    pub rows: Vec<SweepRow>,
}

impl SweepReport {
    /// Tab-separated table with a header row.
    pub fn to_tsv(&self) -> String {
        let name = match self.param {
            SweepParam::PathLength => "path_length",
            SweepParam::GcnLayers => "gcn_layers",
        };
        let mut out = format!("{name}\taccuracy\tprecision\trecall\tf1\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{}\t{:.4}\t{:.4}\t{:.4}\t{:.4}\n",
                r.value, r.accuracy, r.precision, r.recall, r.f1
            ));
        }
        out
    }
}

/// Trains one model per value, parsing the corpus once and featurizing once
/// per distinct input shape. Metrics come from the test split, or the
/// validation split when there is no test data.
pub fn sweep(
    run: &RunConfig,
    registry: &GrammarRegistry,
    param: SweepParam,
    values: &[usize],
) -> Result<SweepReport, PipelineError> {
    if values.is_empty() {
        return Err(PipelineError::Config(
            "sweep needs at least one value".into(),
        ));
    }
    run.validate().map_err(PipelineError::Config)?;
    let prepared = prepare(run, registry)?;
    let mut cache = FeatureCache::default();
    let mut rows = Vec::new();
    let mut split = Split::Test;
    for &value in values {
        let mut cfg = run.clone();
        match param {
            SweepParam::PathLength => cfg.model.path_length = value,
            SweepParam::GcnLayers => cfg.model.gcn_layers = value,
        }
        let report = train_prepared(&cfg, &prepared, &mut cache)?;
        let metrics = match (&report.test, &report.validation) {
            (Some(m), _) => m.clone(),
            (None, Some(m)) => {
                split = Split::Validation;
                m.clone()
            }
            (None, None) => return Err(PipelineError::EmptySplit("test".into())),
        };
        log::info!("{param:?} = {value}: accuracy {:.4}", metrics.accuracy);
        rows.push(SweepRow {
            value,
            accuracy: metrics.accuracy,
            precision: metrics.precision,
            recall: metrics.recall,
            f1: metrics.f1,
        });
    }
    Ok(SweepReport {
        run: run.clone(),
        param,
        split,
        rows,
    })
}

/// Path-length distribution of a corpus, overall and per language.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CorpusStats {
    pub overall: LengthStats,
    pub per_language: Vec<(Language, LengthStats)>,
    pub files: usize,
    pub classes: usize,
}

impl CorpusStats {
    pub fn render_table(&self, name: &str) -> String {
        let mut out = format!(
            "{:<12} {:>7} {:>9} {:>7} {:>7} {:>7} {:>7} {:>7}\n",
            "dataset", "files", "mean", "median", "70%", "80%", "90%", "max"
        );
        let mut row = |label: &str, s: &LengthStats| {
            out.push_str(&format!(
                "{:<12} {:>7} {:>9.1} {:>7} {:>7} {:>7} {:>7} {:>7}\n",
                label, s.count, s.mean, s.median, s.p70, s.p80, s.p90, s.max
            ));
        };
        row(name, &self.overall);
        for (lang, s) in &self.per_language {
            row(&format!("  {lang}"), s);
        }
        out
    }
}

/// Parses the whole corpus (unified unless `run.unified_vocab` is off) and
/// summarizes untruncated pre-order path lengths.
pub fn corpus_stats(
    run: &RunConfig,
    registry: &GrammarRegistry,
) -> Result<CorpusStats, PipelineError> {
    if run.corpus.is_none() && run.manifest.is_none() {
        return Err(PipelineError::Config(
            "no corpus directory or manifest given".into(),
        ));
    }
    let table = load_table(run)?;
    let options = IngestOptions {
        mask_names: run.mask_names.clone(),
    };
    let corpus = ingest_corpus(run.corpus.as_deref(), run.manifest.as_deref(), &options)?;
    let asts = parse_corpus(registry, table.as_ref(), &corpus)?;
    let overall = path_length_stats(&asts)?;
    let per_language = corpus
        .language_counts()
        .into_keys()
        .map(|lang| {
            let trees = asts
                .iter()
                .zip(&corpus.files)
                .filter(|(_, f)| f.language == lang)
                .map(|(a, _)| a);
            path_length_stats(trees).map(|s| (lang, s))
        })
        .collect::<Result<_, _>>()?;
    Ok(CorpusStats {
        overall,
        per_language,
        files: corpus.len(),
        classes: corpus.num_classes(),
    })
}
