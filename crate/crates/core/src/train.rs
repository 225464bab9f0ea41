//! Mini-batch training with Adam, and evaluation.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::featurize::Features;
use crate::metrics::{MetricsError, MetricsReport};
use crate::model::{ModelError, UastModel};
use crate::tensor::{Adam, AdamConfig, Tensor, TensorError};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum TrainError {
    #[error("loss became {loss} at step {step}")]
    DivergenceDetected { step: usize, loss: f64 },
    #[error("training split is empty")]
    EmptyTrainingSet,
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Optimizer(#[from] TensorError),
}

/// A featurized sample with its class index.
#[derive(Clone, Debug, PartialEq)]
pub struct Example {
    pub features: Features,
    pub label: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub adam: AdamConfig,
    /// Stops after this many optimizer steps even mid-epoch.
    pub max_steps: Option<usize>,
    /// Seeds batch shuffling and dropout.
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 5,
            batch_size: 64,
            adam: AdamConfig::default(),
            max_steps: None,
            seed: 42,
        }
    }
}

/// One line of the training history.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub steps: usize,
    pub train_loss: f64,
    /// Accuracy of the training-mode predictions made while fitting.
    pub train_accuracy: f64,
    pub val_accuracy: Option<f64>,
    pub val_precision: Option<f64>,
    pub val_recall: Option<f64>,
    pub val_f1: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct TrainOutcome {
    /// Parameters from the epoch with the best validation accuracy (the last
    /// epoch when there is no validation data).
    pub best: UastModel,
    pub best_epoch: usize,
    pub history: Vec<EpochRecord>,
    /// Mean batch loss after every optimizer step.
    pub step_losses: Vec<f64>,
    pub steps: usize,
}

/// Support-weighted metrics of eval-mode predictions.
pub fn evaluate(model: &UastModel, examples: &[Example]) -> Result<MetricsReport, TrainError> {
    if examples.is_empty() {
        return Err(MetricsError::EmptySplit.into());
    }
    let mut predicted = Vec::with_capacity(examples.len());
    for ex in examples {
        let probs = model.predict_proba(&ex.features)?;
        predicted.push(Tensor::vector(probs).argmax());
    }
    let actual: Vec<usize> = examples.iter().map(|e| e.label).collect();
    Ok(MetricsReport::from_predictions(
        model.config.num_classes,
        &actual,
        &predicted,
    )?)
}

/// Fits `model` in place and returns the best parameters seen.
///
/// `on_step` receives the step number and mean batch loss.
pub fn train(
    model: &mut UastModel,
    train_set: &[Example],
    validation: &[Example],
    config: &TrainConfig,
    mut on_step: impl FnMut(usize, f64),
) -> Result<TrainOutcome, TrainError> {
    if train_set.is_empty() {
        return Err(TrainError::EmptyTrainingSet);
    }
    let batch_size = config.batch_size.max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut adam = Adam::new(config.adam, model.params.tensors());
    let names = model.params.names().to_vec();
    let mut order: Vec<usize> = (0..train_set.len()).collect();
    let mut history = Vec::new();
    let mut step_losses = Vec::new();
    let mut best: Option<(f64, usize, UastModel)> = None;
    let mut steps = 0;

    'epochs: for epoch in 1..=config.epochs {
        order.shuffle(&mut rng);
        let (mut loss_sum, mut correct, mut seen) = (0.0, 0usize, 0usize);
        for batch in order.chunks(batch_size) {
            if config.max_steps.is_some_and(|m| steps >= m) {
                break;
            }
            let mut grads: Vec<Tensor> = model
                .params
                .tensors()
                .iter()
                .map(|t| Tensor::zeros(t.shape()))
                .collect();
            let mut batch_loss = 0.0;
            for &i in batch {
                let ex = &train_set[i];
                let sample = model.loss_and_grads(&ex.features, ex.label, true, &mut rng)?;
                batch_loss += sample.loss;
                if Tensor::vector(sample.probs).argmax() == ex.label {
                    correct += 1;
                }
                for (acc, g) in grads.iter_mut().zip(&sample.grads) {
                    acc.data_mut()
                        .iter_mut()
                        .zip(g.data())
                        .for_each(|(a, g)| *a += g);
                }
            }
            let scale = 1.0 / batch.len() as f64;
            for g in &mut grads {
                g.data_mut().iter_mut().for_each(|x| *x *= scale);
            }
            let mean_loss = batch_loss * scale;
            steps += 1;
            if !mean_loss.is_finite() {
                return Err(TrainError::DivergenceDetected {
                    step: steps,
                    loss: mean_loss,
                });
            }
            let grads: Vec<Option<Tensor>> = grads.into_iter().map(Some).collect();
            adam.step(model.params.tensors_mut(), &grads, &names)?;
            if !model.params.all_finite() {
                return Err(TrainError::DivergenceDetected {
                    step: steps,
                    loss: f64::NAN,
                });
            }
            loss_sum += batch_loss;
            seen += batch.len();
            step_losses.push(mean_loss);
            log::debug!("step {steps} loss {mean_loss:.6}");
            on_step(steps, mean_loss);
        }
        if seen == 0 {
            break 'epochs;
        }
        let val = if validation.is_empty() {
            None
        } else {
            Some(evaluate(model, validation)?)
        };
        let record = EpochRecord {
            epoch,
            steps,
            train_loss: loss_sum / seen as f64,
            train_accuracy: correct as f64 / seen as f64,
            val_accuracy: val.as_ref().map(|m| m.accuracy),
            val_precision: val.as_ref().map(|m| m.precision),
            val_recall: val.as_ref().map(|m| m.recall),
            val_f1: val.as_ref().map(|m| m.f1),
        };
        log::info!(
            "epoch {epoch}: loss {:.4} train acc {:.4} val acc {}",
            record.train_loss,
            record.train_accuracy,
            record
                .val_accuracy
                .map_or("-".to_string(), |a| format!("{a:.4}"))
        );
        let score = record.val_accuracy.unwrap_or(f64::INFINITY);
        if validation.is_empty() || best.as_ref().is_none_or(|(s, _, _)| score > *s) {
            best = Some((score, epoch, model.clone()));
        }
        history.push(record);
    }
    let (best_epoch, best) = match best {
        Some((_, e, m)) => (e, m),
        None => (0, model.clone()),
    };
    Ok(TrainOutcome {
        best,
        best_epoch,
        history,
        step_losses,
        steps,
    })
}
