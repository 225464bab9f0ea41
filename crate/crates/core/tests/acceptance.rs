//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each,
//! and exits non-zero if any gating criterion fails.
//!
//! Dataset-scale checks run only when the datasets are supplied:
//! `UAST_JC_DATASET` and `UAST_LEETCODE_DATASET` point at corpus directories
//! laid out as `<label>/<language>/<file>`.

use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use uast::dataset::synth::{generate_corpus, SynthOptions};
use uast::dataset::SplitRatios;
use uast::featurize::featurize;
use uast::frontend::{
    parse_source, unify_ast, AstNode, GrammarRegistry, UnificationTable, UnifiedAst, Vocabulary,
};
use uast::lang::Language;
use uast::metrics::MetricsReport;
use uast::model::{Mode, ModelConfig, UastModel};
use uast::pipeline::{self, corpus_stats, run_training, CHECKPOINT_FILE, HISTORY_FILE};
use uast::run::{Profile, RunConfig};
use uast::tensor::check::{central_difference, max_relative_error};
use uast::tensor::{SparseMatrix, Tape, Tensor, Var};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn toy_corpus() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/toy")
}

fn within(limit: Duration, started: Instant) -> Result<(), String> {
    let spent = started.elapsed();
    ensure(spent < limit, format!("took {spent:.1?}, limit {limit:?}"))
}

// ---------------------------------------------------------------- criterion 1

fn random_tensor(rng: &mut ChaCha8Rng, shape: &[usize]) -> Tensor {
    let n = shape.iter().product();
    Tensor::new(
        shape.to_vec(),
        (0..n).map(|_| rng.random_range(-1.0..1.0)).collect(),
    )
    .unwrap()
}

/// Gradient of `sum(weights * op(inputs))` from the tape versus central
/// differences of the forward values.
fn op_error(inputs: &[Tensor], op: &OpFn) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let probe = {
        let mut tape = Tape::new();
        let vars: Vec<Var> = inputs.iter().map(|t| tape.constant(t.clone())).collect();
        let out = op(&mut tape, &vars);
        random_tensor(&mut rng, tape.shape(out))
    };
    let forward = |ts: &[Tensor], tape: &mut Tape| -> (Vec<Var>, Var) {
        let vars: Vec<Var> = ts.iter().map(|t| tape.leaf(t.clone())).collect();
        let out = op(tape, &vars);
        let w = tape.constant(probe.clone());
        let weighted = tape.mul(out, w).unwrap();
        (vars, tape.sum(weighted))
    };
    let mut tape = Tape::new();
    let (vars, loss) = forward(inputs, &mut tape);
    tape.backward(loss).unwrap();
    let analytic: Vec<Tensor> = vars.iter().map(|&v| tape.grad(v).unwrap()).collect();
    let numeric = central_difference(
        |ts| {
            let mut tape = Tape::new();
            let (_, loss) = forward(ts, &mut tape);
            tape.value(loss).item()
        },
        inputs,
        1e-5,
    );
    max_relative_error(&analytic, &numeric)
}

type OpFn = dyn Fn(&mut Tape, &[Var]) -> Var;

fn per_op_errors() -> Vec<(&'static str, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let a = random_tensor(&mut rng, &[3, 4]);
    let b = random_tensor(&mut rng, &[4, 2]);
    let c = random_tensor(&mut rng, &[3, 4]);
    let row = random_tensor(&mut rng, &[1, 4]);
    let table = random_tensor(&mut rng, &[6, 4]);
    // Keep relu inputs away from its kink.
    let away: Tensor = Tensor::new(
        vec![3, 4],
        a.data()
            .iter()
            .map(|x| if x.abs() < 0.1 { x + 0.3 } else { *x })
            .collect(),
    )
    .unwrap();
    let adj = Arc::new(
        SparseMatrix::from_triplets(
            3,
            3,
            vec![
                (0, 0, 0.5),
                (0, 1, 0.4),
                (1, 0, 0.4),
                (1, 1, 0.3),
                (2, 2, 1.0),
                (1, 2, 0.2),
                (2, 1, 0.2),
            ],
        )
        .unwrap(),
    );
    let logits = random_tensor(&mut rng, &[1, 5]);
    let cases: Vec<(&'static str, Vec<Tensor>, Box<OpFn>)> = vec![
        (
            "matmul",
            vec![a.clone(), b.clone()],
            Box::new(|t, v| t.matmul(v[0], v[1]).unwrap()),
        ),
        (
            "transpose",
            vec![a.clone()],
            Box::new(|t, v| t.transpose(v[0]).unwrap()),
        ),
        (
            "add",
            vec![a.clone(), c.clone()],
            Box::new(|t, v| t.add(v[0], v[1]).unwrap()),
        ),
        (
            "add_row_broadcast",
            vec![a.clone(), row.clone()],
            Box::new(|t, v| t.add(v[0], v[1]).unwrap()),
        ),
        (
            "mul",
            vec![a.clone(), c.clone()],
            Box::new(|t, v| t.mul(v[0], v[1]).unwrap()),
        ),
        (
            "scale",
            vec![a.clone()],
            Box::new(|t, v| t.scale(v[0], -1.7)),
        ),
        (
            "concat_rows",
            vec![a.clone(), c.clone()],
            Box::new(|t, v| t.concat(&[v[0], v[1]], 0).unwrap()),
        ),
        (
            "concat_cols",
            vec![a.clone(), c.clone()],
            Box::new(|t, v| t.concat(&[v[0], v[1]], 1).unwrap()),
        ),
        (
            "slice",
            vec![a.clone()],
            Box::new(|t, v| t.slice(v[0], 1, 1..3).unwrap()),
        ),
        ("sigmoid", vec![a.clone()], Box::new(|t, v| t.sigmoid(v[0]))),
        ("tanh", vec![a.clone()], Box::new(|t, v| t.tanh(v[0]))),
        ("relu", vec![away], Box::new(|t, v| t.relu(v[0]))),
        ("softmax", vec![a.clone()], Box::new(|t, v| t.softmax(v[0]))),
        (
            "masked_softmax",
            vec![a.clone()],
            Box::new(|t, v| t.masked_softmax(v[0], 3).unwrap()),
        ),
        (
            "dropout",
            vec![a.clone()],
            Box::new(|t, v| {
                t.dropout(v[0], 0.3, true, &mut ChaCha8Rng::seed_from_u64(4))
                    .unwrap()
            }),
        ),
        (
            "embedding",
            vec![table],
            Box::new(|t, v| t.embedding(v[0], &[2, 0, 5, 2, 1], Some(0)).unwrap()),
        ),
        ("sum", vec![a.clone()], Box::new(|t, v| t.sum(v[0]))),
        ("mean", vec![a.clone()], Box::new(|t, v| t.mean(v[0]))),
        (
            "sum_rows",
            vec![a.clone()],
            Box::new(|t, v| t.sum_rows(v[0]).unwrap()),
        ),
        (
            "mean_rows",
            vec![a.clone()],
            Box::new(|t, v| t.mean_rows(v[0]).unwrap()),
        ),
        (
            "spmm",
            vec![a.clone()],
            Box::new(move |t, v| t.spmm(Arc::clone(&adj), v[0]).unwrap()),
        ),
        (
            "cross_entropy",
            vec![logits],
            Box::new(|t, v| {
                let p = t.softmax(v[0]);
                t.cross_entropy(p, 3).unwrap()
            }),
        ),
    ];
    cases
        .into_iter()
        .map(|(name, inputs, op)| (name, op_error(&inputs, op.as_ref())))
        .collect()
}

fn criterion_1() -> Outcome {
    let started = Instant::now();
    let ops = per_op_errors();
    let (worst_op, worst_op_err) =
        ops.iter()
            .cloned()
            .fold(("", 0.0), |m, x| if x.1 > m.1 { x } else { m });
    ensure(
        worst_op_err < 1e-6,
        format!("op {worst_op}: rel-err {worst_op_err:.2e}"),
    )?;

    let vocab = Vocabulary::from_kinds(["a", "b", "c", "d", "e", "f", "g", "h"].map(String::from));
    ensure(vocab.size() == 10, "tiny vocabulary must have 10 entries")?;
    let sample = featurize(
        &UnifiedAst::raw(AstNode::from_sexpr("(a (b (c) (d (h))) (e (f)) (g))").unwrap()),
        &vocab,
        6,
        6,
    );
    let mut worst_model = 0.0f64;
    let mut variants = Vec::new();
    for mode in [Mode::Uast, Mode::Sast, Mode::Gast] {
        for (training, projections) in [(false, false), (true, false), (true, true)] {
            variants.push((mode, training, projections));
        }
    }
    for (mode, training, projections) in variants {
        let config = ModelConfig {
            path_length: 6,
            graph_size: 6,
            embed_dim: 8,
            heads: 4,
            lstm_hidden: 4,
            gcn_hidden: 8,
            gcn_out: 4,
            num_classes: 3,
            vocab_size: 10,
            learned_projections: projections,
            mode,
            ..Default::default()
        };
        let model = UastModel::new(config, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        let rng = || ChaCha8Rng::seed_from_u64(8);
        let analytic = model
            .loss_and_grads(&sample, 1, training, &mut rng())
            .unwrap()
            .grads;
        let numeric = central_difference(
            |ts| {
                let mut probe = model.clone();
                probe.params.tensors_mut().clone_from_slice(ts);
                probe
                    .loss_and_grads(&sample, 1, training, &mut rng())
                    .unwrap()
                    .loss
            },
            model.params.tensors(),
            1e-5,
        );
        for ((name, a), n) in model.params.names().iter().zip(&analytic).zip(&numeric) {
            let err = max_relative_error(std::slice::from_ref(a), std::slice::from_ref(n));
            ensure(
                err < 1e-4,
                format!("{mode} training={training} {name}: rel-err {err:.2e}"),
            )?;
            worst_model = worst_model.max(err);
        }
    }
    within(Duration::from_secs(30), started)?;
    Ok(format!(
        "{} ops max rel-err {worst_op_err:.1e}; full model (3 modes, dropout, projections) max rel-err {worst_model:.1e}; {:.1?}",
        ops.len(),
        started.elapsed()
    ))
}

// ---------------------------------------------------------------- criterion 2

fn criterion_2(registry: &GrammarRegistry) -> Outcome {
    let started = Instant::now();
    let out = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut parts = Vec::new();
    for (mode, needed) in [(Mode::Uast, 0.97), (Mode::Sast, 0.90), (Mode::Gast, 0.90)] {
        let mut run = RunConfig::for_profile(Profile::Toy);
        run.corpus = Some(toy_corpus());
        run.split = SplitRatios([1, 0, 0]);
        run.model.mode = mode;
        run.out_dir = out.path().join(mode.name());
        let report = run_training(&run, registry).map_err(|e| e.to_string())?;
        ensure(
            report.train.total == 32,
            format!("expected 32 training samples, got {}", report.train.total),
        )?;
        ensure(report.train.num_classes() == 4, "expected 4 classes")?;
        let steps = report.checkpoint.meta.steps;
        ensure(steps <= 200, format!("{mode}: {steps} steps"))?;
        let acc = report.train.accuracy;
        ensure(
            acc >= needed,
            format!("{mode}: train accuracy {acc:.4} < {needed}"),
        )?;
        parts.push(format!("{mode} {acc:.3}"));
    }
    within(Duration::from_secs(120), started)?;
    Ok(format!(
        "train accuracy within 200 steps: {}; {:.1?}",
        parts.join(", "),
        started.elapsed()
    ))
}

// ---------------------------------------------------------------- criterion 3

fn criterion_3(registry: &GrammarRegistry) -> Outcome {
    let started = Instant::now();
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let corpus = dir.path().join("corpus");
    let options = SynthOptions {
        classes: 3,
        per_cell: 60,
        seed: 42,
        ..Default::default()
    };
    let files = generate_corpus(&corpus, &options).map_err(|e| e.to_string())?;
    ensure(
        files.len() == 360,
        format!("generator wrote {} files", files.len()),
    )?;
    let mut run = RunConfig::for_profile(Profile::Toy);
    run.corpus = Some(corpus);
    run.seed = 42;
    run.out_dir = dir.path().join("run");
    let report = run_training(&run, registry).map_err(|e| e.to_string())?;
    let test = report.test.as_ref().ok_or("no test split")?;
    ensure(
        test.accuracy >= 0.90,
        format!("test accuracy {:.4}", test.accuracy),
    )?;
    within(Duration::from_secs(600), started)?;
    Ok(format!(
        "360 generated files, test accuracy {:.4} (F1 {:.4}) on {} samples; {:.1?}",
        test.accuracy,
        test.f1,
        test.total,
        started.elapsed()
    ))
}

// ---------------------------------------------------------------- criterion 4

struct Oracle {
    precision: f64,
    recall: f64,
    f1: f64,
    accuracy: f64,
    confusion: Vec<Vec<u64>>,
}

/// Counts straight from the label lists, one class at a time.
#[allow(clippy::needless_range_loop)]
fn brute_force_metrics(k: usize, actual: &[usize], predicted: &[usize]) -> Oracle {
    let n = actual.len();
    let mut confusion = vec![vec![0u64; k]; k];
    for a in 0..k {
        for p in 0..k {
            confusion[a][p] = (0..n)
                .filter(|&i| actual[i] == a && predicted[i] == p)
                .count() as u64;
        }
    }
    let (mut precision, mut recall, mut f1) = (0.0, 0.0, 0.0);
    for c in 0..k {
        let tp = (0..n)
            .filter(|&i| actual[i] == c && predicted[i] == c)
            .count();
        let fp = (0..n)
            .filter(|&i| actual[i] != c && predicted[i] == c)
            .count();
        let fn_ = (0..n)
            .filter(|&i| actual[i] == c && predicted[i] != c)
            .count();
        let support = tp + fn_;
        let p = if tp + fp == 0 {
            0.0
        } else {
            tp as f64 / (tp + fp) as f64
        };
        let r = if support == 0 {
            0.0
        } else {
            tp as f64 / support as f64
        };
        let f = if p + r > 0.0 {
            2.0 * p * r / (p + r)
        } else {
            0.0
        };
        let w = support as f64 / n as f64;
        precision += w * p;
        recall += w * r;
        f1 += w * f;
    }
    let correct = (0..n).filter(|&i| actual[i] == predicted[i]).count();
    Oracle {
        precision,
        recall,
        f1,
        accuracy: correct as f64 / n as f64,
        confusion,
    }
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for trial in 0..1000 {
        let k = rng.random_range(1..=10);
        let n = rng.random_range(1..=500);
        let actual: Vec<usize> = (0..n).map(|_| rng.random_range(0..k)).collect();
        // Mix of random and mostly-correct predictions.
        let skill: f64 = rng.random();
        let predicted: Vec<usize> = actual
            .iter()
            .map(|&a| {
                if rng.random::<f64>() < skill {
                    a
                } else {
                    rng.random_range(0..k)
                }
            })
            .collect();
        let got =
            MetricsReport::from_predictions(k, &actual, &predicted).map_err(|e| e.to_string())?;
        let want = brute_force_metrics(k, &actual, &predicted);
        let same = got.confusion == want.confusion
            && got.precision == want.precision
            && got.recall == want.recall
            && got.f1 == want.f1
            && got.accuracy == want.accuracy;
        ensure(
            same,
            format!("trial {trial} (k={k}, n={n}) differs from the brute-force oracle"),
        )?;
    }
    Ok("1000 random trials (k <= 10, n <= 500) equal the brute-force oracle exactly".into())
}

// ---------------------------------------------------------------- criterion 5

fn random_tree(rng: &mut ChaCha8Rng, budget: &mut usize, depth: usize) -> AstNode {
    const KINDS: [&str; 6] = ["a", "b", "c", "d", "e", "f"];
    let kind = KINDS[rng.random_range(0..KINDS.len())];
    let mut children = Vec::new();
    while *budget > 0 && depth < 12 && rng.random::<f64>() < 0.6 {
        *budget -= 1;
        children.push(random_tree(rng, budget, depth + 1));
    }
    AstNode::new(kind, children)
}

fn sample_tree(rng: &mut ChaCha8Rng) -> UnifiedAst {
    let mut budget = rng.random_range(0..80);
    UnifiedAst::raw(random_tree(rng, &mut budget, 0))
}

/// Pre-order kinds and parent indices by an explicit stack.
fn preorder_oracle(root: &AstNode) -> Vec<(String, Option<usize>)> {
    let mut out = Vec::new();
    let mut stack = vec![(root, None)];
    while let Some((node, parent)) = stack.pop() {
        let me = out.len();
        out.push((node.kind().to_string(), parent));
        for child in node.children().iter().rev() {
            stack.push((child, Some(me)));
        }
    }
    out
}

#[allow(clippy::needless_range_loop)]
fn criterion_5() -> Outcome {
    let vocab = Vocabulary::from_kinds(["a", "b", "c", "d"].map(String::from));
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for trial in 0..500 {
        let tree = sample_tree(&mut rng);
        let n_size = rng.random_range(1..40);
        let g = featurize(&tree, &vocab, 8, n_size).graph;
        let nodes = preorder_oracle(tree.root());
        let kept = nodes.len().min(n_size);
        let mut edges: Vec<(usize, usize)> = (0..kept)
            .filter_map(|i| nodes[i].1.map(|p| (p, i)))
            .collect();
        let mut got_edges = g.edges().to_vec();
        edges.sort_unstable();
        got_edges.sort_unstable();
        ensure(
            edges == got_edges,
            format!("tree {trial}: edge list differs"),
        )?;
        let mut a_tilde = vec![vec![0.0f64; n_size]; n_size];
        for i in 0..kept {
            a_tilde[i][i] = 1.0;
        }
        for &(p, c) in &edges {
            a_tilde[p][c] = 1.0;
            a_tilde[c][p] = 1.0;
        }
        let degree: Vec<f64> = a_tilde.iter().map(|row| row.iter().sum()).collect();
        for i in 0..n_size {
            for j in 0..n_size {
                let want = if a_tilde[i][j] == 0.0 {
                    0.0
                } else {
                    a_tilde[i][j] / (degree[i] * degree[j]).sqrt()
                };
                let got = g.norm_adj_entry(i, j);
                ensure(
                    got == want,
                    format!("tree {trial}: entry ({i},{j}) = {got}, expected {want}"),
                )?;
            }
        }
    }
    for trial in 0..1000 {
        let tree = sample_tree(&mut rng);
        let (l, n_size) = (rng.random_range(1..60), rng.random_range(1..60));
        let f = featurize(&tree, &vocab, l, n_size);
        let nodes = preorder_oracle(tree.root());
        let real = nodes.len().min(l);
        let expect: Vec<usize> = (0..l)
            .map(|i| {
                if i < real {
                    vocab.lookup(&nodes[i].0)
                } else {
                    0
                }
            })
            .collect();
        ensure(
            f.path.indices == expect,
            format!("tree {trial}: path differs"),
        )?;
        ensure(
            f.path.true_length == real,
            format!("tree {trial}: true length {}", f.path.true_length),
        )?;
        ensure(
            f.path.indices[real..].iter().all(|&x| x == 0),
            "padding not PAD",
        )?;
        ensure(
            f.path.indices[..real].iter().all(|&x| x != 0),
            "PAD inside the real path",
        )?;
        let kept = nodes.len().min(n_size);
        let g = &f.graph;
        ensure(
            g.size() == n_size && g.node_kinds().len() == n_size,
            "graph not padded to N",
        )?;
        ensure(
            g.node_count() == kept,
            format!("tree {trial}: node count {}", g.node_count()),
        )?;
        ensure(g.edges().len() == kept - 1, "truncated graph is not a tree")?;
        ensure(
            g.node_kinds()[..kept] == expect_kinds(&vocab, &nodes, kept),
            "node kinds differ",
        )?;
        ensure(
            g.node_kinds()[kept..].iter().all(|&x| x == 0),
            "node padding not PAD",
        )?;
    }
    Ok("norm_adj exact on 500 random trees; path/pad/truncate and graph invariants on 1000 random trees".into())
}

fn expect_kinds(vocab: &Vocabulary, nodes: &[(String, Option<usize>)], kept: usize) -> Vec<usize> {
    nodes[..kept].iter().map(|(k, _)| vocab.lookup(k)).collect()
}

// ---------------------------------------------------------------- criterion 6

fn criterion_6(registry: &GrammarRegistry) -> Outcome {
    let snippets = [
        (Language::Java, "public class Add {\n    public static int add(int a, int b) {\n        return a + b;\n    }\n}\n"),
        (Language::Cpp, "int add(int a, int b) {\n    return a + b;\n}\n"),
        (Language::Python, "def add(a, b):\n    return a + b\n"),
    ];
    let table = UnificationTable::builtin();
    let mut raw_roots = Vec::new();
    for (lang, code) in snippets {
        let parsed = parse_source(registry, code, lang).map_err(|e| e.to_string())?;
        ensure(
            !parsed.has_errors,
            format!("{lang} snippet has syntax errors"),
        )?;
        raw_roots.push(parsed.root.kind().to_string());
        let unified = unify_ast(&parsed.root, lang, &table);
        ensure(
            unified.root().kind() == "unit",
            format!("{lang} root is {}", unified.root().kind()),
        )?;
        ensure(
            unified.root().contains_kind("block"),
            format!("{lang} has no block"),
        )?;
    }
    ensure(
        raw_roots == ["program", "translation_unit", "module"],
        format!("raw roots {raw_roots:?}"),
    )?;
    Ok("program / translation_unit / module all unify to unit; every tree contains block".into())
}

// ---------------------------------------------------------------- criterion 7

fn criterion_7(registry: &GrammarRegistry) -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut run = RunConfig::for_profile(Profile::Toy);
    run.corpus = Some(toy_corpus());
    run.seed = 7;
    run.train.epochs = 4;
    run.out_dir = dir.path().join("run");
    let read = |name: &str| fs::read(run.out_dir.join(name)).map_err(|e| e.to_string());
    run_training(&run, registry).map_err(|e| e.to_string())?;
    let first = (read(CHECKPOINT_FILE)?, read(HISTORY_FILE)?);
    run_training(&run, registry).map_err(|e| e.to_string())?;
    let second = (read(CHECKPOINT_FILE)?, read(HISTORY_FILE)?);
    ensure(first.0 == second.0, "checkpoints differ")?;
    ensure(first.1 == second.1, "history files differ")?;
    Ok(format!(
        "identical checkpoint ({} bytes) and history ({} bytes)",
        first.0.len(),
        first.1.len()
    ))
}

// ---------------------------------------------------------------- criterion 8

fn dataset_env(var: &str) -> Option<PathBuf> {
    std::env::var_os(var)
        .map(PathBuf::from)
        .filter(|p| p.is_dir())
}

/// Not gating: needs an external dataset and hours of CPU.
fn criterion_8(registry: &GrammarRegistry) -> Option<Outcome> {
    let targets = [
        ("UAST_JC_DATASET", Profile::Jc, 0.9626),
        ("UAST_LEETCODE_DATASET", Profile::Leetcode, 0.7964),
    ];
    let supplied: Vec<_> = targets
        .iter()
        .filter_map(|(var, p, acc)| dataset_env(var).map(|d| (d, *p, *acc)))
        .collect();
    if supplied.is_empty() {
        return None;
    }
    let mut lines = Vec::new();
    for (dir, profile, paper) in supplied {
        let mut run = RunConfig::for_profile(profile);
        run.corpus = Some(dir);
        run.out_dir = std::env::temp_dir().join(format!("uast-acceptance-{profile}"));
        let report = match run_training(&run, registry) {
            Ok(r) => r,
            Err(e) => return Some(Err(format!("{profile}: {e}"))),
        };
        let acc = report.test.map_or(0.0, |m| m.accuracy);
        if (acc - paper).abs() > 0.05 {
            return Some(Err(format!(
                "{profile}: test accuracy {acc:.4}, reference {paper}"
            )));
        }
        lines.push(format!("{profile} {acc:.4} (reference {paper})"));
    }
    Some(Ok(lines.join(", ")))
}

// ---------------------------------------------------------------- criterion 9

/// Smallest value with at least `pct`% of the data at or below it.
fn percentile_oracle(values: &[usize], pct: usize) -> usize {
    let mut sorted = values.to_vec();
    sorted.sort_unstable();
    for (i, v) in sorted.iter().enumerate() {
        if (i + 1) * 100 >= pct * sorted.len() {
            return *v;
        }
    }
    unreachable!()
}

fn chain(len: usize) -> String {
    (0..len).map(|_| "(n").collect::<String>() + &")".repeat(len)
}

fn criterion_9(registry: &GrammarRegistry) -> Outcome {
    // Hand-made trees: path lengths 1..=10 plus 40, so every statistic is
    // known in advance.
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let lengths: Vec<usize> = (1..=10).chain([40]).collect();
    for (i, &len) in lengths.iter().enumerate() {
        let class = if i % 2 == 0 { "even" } else { "odd" };
        let path = dir
            .path()
            .join(class)
            .join("java")
            .join(format!("t{i:02}.sexp"));
        fs::create_dir_all(path.parent().unwrap()).map_err(|e| e.to_string())?;
        fs::write(&path, chain(len)).map_err(|e| e.to_string())?;
    }
    let mut run = RunConfig::for_profile(Profile::Toy);
    run.corpus = Some(dir.path().to_path_buf());
    let s = corpus_stats(&run, registry)
        .map_err(|e| e.to_string())?
        .overall;
    // 11 values: ranks ceil(0.5*11)=6, ceil(0.7*11)=8, ceil(0.8*11)=9, ceil(0.9*11)=10.
    let hand = (11, 95.0 / 11.0, 6, 8, 9, 10, 40);
    let got = (s.count, s.mean, s.median, s.p70, s.p80, s.p90, s.max);
    ensure(
        got == hand,
        format!("hand corpus: got {got:?}, expected {hand:?}"),
    )?;

    // Bundled toy corpus: node counts read back from the unified trees.
    let mut run = RunConfig::for_profile(Profile::Toy);
    run.corpus = Some(toy_corpus());
    let stats = corpus_stats(&run, registry)
        .map_err(|e| e.to_string())?
        .overall;
    let prepared = pipeline::prepare(
        &RunConfig {
            split: SplitRatios([1, 0, 0]),
            ..run
        },
        registry,
    )
    .map_err(|e| e.to_string())?;
    let counts: Vec<usize> = prepared
        .asts
        .iter()
        .map(|a| a.root().to_sexpr().matches('(').count())
        .collect();
    let mut by_pct = BTreeMap::new();
    for pct in [50, 70, 80, 90] {
        by_pct.insert(pct, percentile_oracle(&counts, pct));
    }
    let want = (
        by_pct[&50],
        by_pct[&70],
        by_pct[&80],
        by_pct[&90],
        *counts.iter().max().unwrap(),
    );
    let got = (stats.median, stats.p70, stats.p80, stats.p90, stats.max);
    ensure(
        got == want,
        format!("toy corpus: got {got:?}, expected {want:?}"),
    )?;

    let mut detail = format!("hand corpus exact; toy corpus median/p70/p80/p90/max {want:?}");
    if let Some(jc) = dataset_env("UAST_JC_DATASET") {
        let mut run = RunConfig::for_profile(Profile::Jc);
        run.corpus = Some(jc);
        let s = corpus_stats(&run, registry)
            .map_err(|e| e.to_string())?
            .overall;
        let off = (s.p80 as f64 - 726.0).abs() / 726.0;
        ensure(
            off <= 0.05,
            format!("JC p80 {} is {:.1}% from 726", s.p80, off * 100.0),
        )?;
        detail.push_str(&format!("; JC p80 {}", s.p80));
    } else {
        detail.push_str("; JC dataset not supplied, dataset part skipped");
    }
    Ok(detail)
}

// ----------------------------------------------------------------------------

fn report(n: usize, outcome: &Outcome) -> bool {
    match outcome {
        Ok(detail) => println!("criterion {n}: PASS  {detail}"),
        Err(detail) => println!("criterion {n}: FAIL  {detail}"),
    }
    outcome.is_ok()
}

fn main() {
    let registry = GrammarRegistry::with_builtin();
    let only: Vec<usize> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let wanted = |n: usize| only.is_empty() || only.contains(&n);
    let mut failed = Vec::new();
    let gating: [(usize, &dyn Fn() -> Outcome); 8] = [
        (1, &criterion_1),
        (2, &|| criterion_2(&registry)),
        (3, &|| criterion_3(&registry)),
        (4, &criterion_4),
        (5, &criterion_5),
        (6, &|| criterion_6(&registry)),
        (7, &|| criterion_7(&registry)),
        (9, &|| criterion_9(&registry)),
    ];
    for (n, check) in gating {
        if n == 9 && wanted(8) {
            match criterion_8(&registry) {
                None => println!("criterion 8: SKIP  non-gating; set UAST_JC_DATASET or UAST_LEETCODE_DATASET to run it"),
                Some(outcome) => {
                    // Reported, never gating.
                    report(8, &outcome);
                }
            }
        }
        if wanted(n) && !report(n, &check()) {
            failed.push(n);
        }
    }
    if !failed.is_empty() {
        println!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
