//! The classifier: a sequence encoder (embedding, self-attention, Bi-LSTM)
//! and a graph encoder (graph convolutions, pooling), concatenated and fed
//! to a softmax layer.

mod config;
pub mod layers;
mod params;

pub use config::{Activation, Mode, ModelConfig, Pooling};
pub use params::{BoundParams, ParamStore};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::featurize::Features;
use crate::tensor::{Tape, Tensor, TensorError, Var};
use layers::{LstmWeights, Projections};
use params::lstm_name;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ModelError {
    #[error("invalid model configuration: {0}")]
    InvalidConfig(String),
    #[error("kind index {index} outside vocabulary of {vocab}")]
    IndexOutOfVocab { index: usize, vocab: usize },
    #[error("graph has no nodes")]
    ZeroNodes,
    #[error("path has no tokens")]
    EmptySequence,
    #[error(
        "sample shaped (L={path}, N={graph}) but the model expects (L={want_path}, N={want_graph})"
    )]
    FeatureShape {
        path: usize,
        graph: usize,
        want_path: usize,
        want_graph: usize,
    },
    #[error("parameter layout: {0}")]
    ParameterLayout(String),
    #[error(transparent)]
    Tensor(#[from] TensorError),
}

/// Handles into one forward pass.
#[derive(Clone, Copy, Debug)]
pub struct ForwardOutput {
    pub h_sast: Option<Var>,
    pub h_gast: Option<Var>,
    pub h_code: Var,
    /// `[1, k]`
    pub probs: Var,
}

/// Loss, gradients and prediction for one sample.
#[derive(Clone, Debug)]
pub struct SampleGrad {
    pub loss: f64,
    pub probs: Vec<f64>,
    /// One per parameter, in store order.
    pub grads: Vec<Tensor>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct UastModel {
    pub config: ModelConfig,
    pub params: ParamStore,
}

impl UastModel {
    pub fn new(config: ModelConfig, rng: &mut impl Rng) -> Result<Self, ModelError> {
        let params = ParamStore::init(&config, rng)?;
        Ok(Self { config, params })
    }

    pub fn from_parts(config: ModelConfig, params: ParamStore) -> Result<Self, ModelError> {
        config.validate()?;
        params.check_layout(&config)?;
        Ok(Self { config, params })
    }

    fn check_sample(&self, sample: &Features) -> Result<(), ModelError> {
        let (path, graph) = (sample.path.len(), sample.graph.size());
        if path != self.config.path_length || graph != self.config.graph_size {
            return Err(ModelError::FeatureShape {
                path,
                graph,
                want_path: self.config.path_length,
                want_graph: self.config.graph_size,
            });
        }
        Ok(())
    }

    /// Records the whole network for `sample` on `tape`.
    ///
    /// Only the real tokens and nodes are computed on: padded path positions
    /// are masked out of attention and never reach the LSTM, and padded
    /// graph rows are excluded from pooling, so skipping them is exact.
    pub fn forward(
        &self,
        tape: &mut Tape,
        params: &BoundParams,
        sample: &Features,
        training: bool,
        rng: &mut impl Rng,
    ) -> Result<ForwardOutput, ModelError> {
        self.check_sample(sample)?;
        let cfg = &self.config;
        let h_sast = if cfg.mode.uses_sequence() {
            let steps = sample.path.true_length;
            if steps == 0 {
                return Err(ModelError::EmptySequence);
            }
            let x = layers::embed(tape, params.get("embedding"), sample.path.tokens())?;
            let projections = cfg.learned_projections.then(|| Projections {
                wq: params.get("attn.wq"),
                wk: params.get("attn.wk"),
                wv: params.get("attn.wv"),
            });
            let attended = layers::self_attention(
                tape,
                x,
                steps,
                cfg.heads,
                cfg.attn_dropout,
                projections,
                training,
                rng,
            )?;
            let lstm: Vec<(LstmWeights, LstmWeights)> = (0..cfg.lstm_layers)
                .map(|l| {
                    let dir = |backward| LstmWeights {
                        w_x: params.get(&lstm_name(l, backward, "w_x")),
                        w_h: params.get(&lstm_name(l, backward, "w_h")),
                        b: params.get(&lstm_name(l, backward, "b")),
                    };
                    (dir(false), dir(true))
                })
                .collect();
            Some(layers::bilstm_encode(
                tape,
                attended,
                steps,
                &lstm,
                cfg.lstm_dropout,
                training,
                rng,
            )?)
        } else {
            None
        };
        let h_gast = if cfg.mode.uses_graph() {
            let graph = &sample.graph;
            let weights: Vec<Var> = (0..cfg.gcn_layers)
                .map(|l| params.get(&format!("gcn.{l}.w")))
                .collect();
            let kinds = &graph.node_kinds()[..graph.node_count()];
            let h =
                layers::gcn_forward(tape, graph.norm_adj(), kinds, &weights, cfg.gcn_activation)?;
            Some(layers::graph_pool(
                tape,
                h,
                graph.node_count(),
                cfg.pooling,
            )?)
        } else {
            None
        };
        let h_code = match (h_sast, h_gast) {
            (Some(s), Some(g)) => layers::fuse(tape, s, g)?,
            (Some(s), None) => s,
            (None, Some(g)) => g,
            (None, None) => unreachable!("every mode uses an encoder"),
        };
        let probs = layers::classify(
            tape,
            h_code,
            params.get("classifier.w"),
            params.get("classifier.b"),
        )?;
        Ok(ForwardOutput {
            h_sast,
            h_gast,
            h_code,
            probs,
        })
    }

    /// Class probabilities in evaluation mode.
    pub fn predict_proba(&self, sample: &Features) -> Result<Vec<f64>, ModelError> {
        let mut tape = Tape::new();
        let params = self.params.bind(&mut tape);
        // no stochastic op runs in eval mode, so the generator is never drawn from
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let out = self.forward(&mut tape, &params, sample, false, &mut rng)?;
        Ok(tape.value(out.probs).data().to_vec())
    }

    /// Cross-entropy loss and its gradient for every parameter.
    pub fn loss_and_grads(
        &self,
        sample: &Features,
        label: usize,
        training: bool,
        rng: &mut impl Rng,
    ) -> Result<SampleGrad, ModelError> {
        let mut tape = Tape::new();
        let params = self.params.bind(&mut tape);
        let out = self.forward(&mut tape, &params, sample, training, rng)?;
        let loss = tape.cross_entropy(out.probs, label)?;
        tape.backward(loss)?;
        let grads = params
            .vars()
            .iter()
            .zip(self.params.tensors())
            .map(|(&v, t)| tape.grad(v).unwrap_or_else(|| Tensor::zeros(t.shape())))
            .collect();
        Ok(SampleGrad {
            loss: tape.value(loss).item(),
            probs: tape.value(out.probs).data().to_vec(),
            grads,
        })
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::featurize::featurize;
    use crate::frontend::{AstNode, UnifiedAst, Vocabulary};
    use crate::tensor::check::{central_difference, max_relative_error};

    pub(crate) fn tiny_config(mode: Mode) -> ModelConfig {
        ModelConfig {
            path_length: 6,
            embed_dim: 8,
            heads: 2,
            lstm_hidden: 4,
            graph_size: 6,
            gcn_hidden: 8,
            gcn_out: 4,
            num_classes: 3,
            vocab_size: 10,
            mode,
            ..Default::default()
        }
    }

    pub(crate) fn tiny_vocab() -> Vocabulary {
        Vocabulary::from_kinds(["a", "b", "c", "d", "e", "f", "g", "h"].map(String::from))
    }

    pub(crate) fn tiny_sample(tree: &str) -> Features {
        featurize(
            &UnifiedAst::raw(AstNode::from_sexpr(tree).unwrap()),
            &tiny_vocab(),
            6,
            6,
        )
    }

    fn model(cfg: ModelConfig) -> UastModel {
        UastModel::new(cfg, &mut ChaCha8Rng::seed_from_u64(11)).unwrap()
    }

    fn gradient_error(cfg: ModelConfig, tree: &str, training: bool) -> f64 {
        let m = model(cfg);
        let sample = tiny_sample(tree);
        let seeded = || ChaCha8Rng::seed_from_u64(5);
        let ad = m
            .loss_and_grads(&sample, 1, training, &mut seeded())
            .unwrap()
            .grads;
        let fd = central_difference(
            |ts| {
                let probe = UastModel {
                    config: m.config.clone(),
                    params: with_tensors(&m.params, ts),
                };
                probe
                    .loss_and_grads(&sample, 1, training, &mut seeded())
                    .unwrap()
                    .loss
            },
            m.params.tensors(),
            1e-5,
        );
        max_relative_error(&ad, &fd)
    }

    fn with_tensors(store: &ParamStore, tensors: &[Tensor]) -> ParamStore {
        let mut out = store.clone();
        out.tensors_mut().clone_from_slice(tensors);
        out
    }

    #[test]
    fn full_gradients_match_finite_differences() {
        for mode in [Mode::Uast, Mode::Sast, Mode::Gast] {
            let err = gradient_error(tiny_config(mode), "(a (b (c) (d)) (e (f)) (g))", false);
            assert!(err < 1e-4, "{mode}: {err}");
        }
    }

    #[test]
    fn gradients_hold_with_dropout_and_projections() {
        let cfg = ModelConfig {
            learned_projections: true,
            ..tiny_config(Mode::Uast)
        };
        let err = gradient_error(cfg, "(a (b) (c (d)))", true);
        assert!(err < 1e-4, "{err}");
        let cfg = ModelConfig {
            gcn_activation: Activation::Sigmoid,
            pooling: Pooling::Sum,
            gcn_layers: 3,
            ..tiny_config(Mode::Gast)
        };
        let err = gradient_error(cfg, "(a (b) (c (d)))", false);
        assert!(err < 1e-4, "{err}");
    }

    #[test]
    fn output_is_a_distribution_and_deterministic() {
        let m = model(tiny_config(Mode::Uast));
        let s = tiny_sample("(a (b) (c))");
        let p = m.predict_proba(&s).unwrap();
        assert_eq!(p.len(), 3);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert_eq!(m.predict_proba(&s).unwrap(), p);
    }

    #[test]
    fn padding_does_not_change_output() {
        let m = model(tiny_config(Mode::Uast));
        let s = tiny_sample("(a (b) (c))");
        let base = m.predict_proba(&s).unwrap();
        let mut t = s.clone();
        t.path.indices[4] = 7;
        t.path.indices[5] = 9;
        assert_eq!(m.predict_proba(&t).unwrap(), base);
    }

    #[test]
    fn fused_vector_layout() {
        let m = model(tiny_config(Mode::Uast));
        let s = tiny_sample("(a (b) (c))");
        let mut tape = Tape::new();
        let p = m.params.bind(&mut tape);
        let out = m
            .forward(&mut tape, &p, &s, false, &mut ChaCha8Rng::seed_from_u64(0))
            .unwrap();
        let code = tape.value(out.h_code).data();
        assert_eq!(code.len(), 12);
        assert_eq!(&code[..8], tape.value(out.h_sast.unwrap()).data());
        assert_eq!(&code[8..], tape.value(out.h_gast.unwrap()).data());
    }

    #[test]
    fn ablations_ignore_the_other_input() {
        let a = tiny_sample("(a (b) (c))");
        let b = tiny_sample("(h (g (f (e))) (d))");
        let mixed = Features {
            path: a.path.clone(),
            graph: b.graph.clone(),
        };
        let sast = model(tiny_config(Mode::Sast));
        assert_eq!(
            sast.predict_proba(&mixed).unwrap(),
            sast.predict_proba(&a).unwrap()
        );
        let gast = model(tiny_config(Mode::Gast));
        assert_eq!(
            gast.predict_proba(&mixed).unwrap(),
            gast.predict_proba(&b).unwrap()
        );
        let uast = model(tiny_config(Mode::Uast));
        assert_ne!(
            uast.predict_proba(&mixed).unwrap(),
            uast.predict_proba(&a).unwrap()
        );
        assert_ne!(
            uast.predict_proba(&mixed).unwrap(),
            uast.predict_proba(&b).unwrap()
        );
    }

    #[test]
    fn pad_rows_start_and_stay_zero() {
        let m = model(tiny_config(Mode::Uast));
        assert!(m
            .params
            .get("embedding")
            .unwrap()
            .row_slice(0)
            .iter()
            .all(|&v| v == 0.0));
        assert!(m
            .params
            .get("gcn.0.w")
            .unwrap()
            .row_slice(0)
            .iter()
            .all(|&v| v == 0.0));
        let g = m
            .loss_and_grads(
                &tiny_sample("(a (b))"),
                0,
                true,
                &mut ChaCha8Rng::seed_from_u64(1),
            )
            .unwrap();
        let i = m
            .params
            .names()
            .iter()
            .position(|n| n == "embedding")
            .unwrap();
        assert!(g.grads[i].row_slice(0).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn forget_bias_starts_at_one() {
        let m = model(tiny_config(Mode::Sast));
        let b = m.params.get("lstm.1.bw.b").unwrap();
        assert_eq!(&b.data()[4..8], &[1.0; 4]);
        assert_eq!(&b.data()[..4], &[0.0; 4]);
    }

    #[test]
    fn rejects_mismatched_features() {
        let m = model(tiny_config(Mode::Uast));
        let s = featurize(
            &UnifiedAst::raw(AstNode::from_sexpr("(a)").unwrap()),
            &tiny_vocab(),
            5,
            6,
        );
        assert!(matches!(
            m.predict_proba(&s),
            Err(ModelError::FeatureShape { .. })
        ));
    }

    #[test]
    fn layout_check_catches_wrong_store() {
        let m = model(tiny_config(Mode::Uast));
        assert!(UastModel::from_parts(m.config.clone(), m.params.clone()).is_ok());
        let other = model(tiny_config(Mode::Sast));
        assert!(UastModel::from_parts(m.config.clone(), other.params).is_err());
    }
}
