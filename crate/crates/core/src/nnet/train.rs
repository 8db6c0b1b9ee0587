use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::model::{batch_gradients, forward, init_model_with_input, BiLstmModel, Gradients};
use super::NnetError;
use crate::features::{FeatureSequence, NUM_FEATURES};
use crate::seed;

/// Optimizer and schedule settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub momentum: f64,
    pub epochs: usize,
    /// Mini-batch size; the full set is used when smaller.
    pub batch_size: usize,
    pub seed: u64,
    /// Global gradient-norm clip, off when `None`.
    pub clip_norm: Option<f64>,
    /// Ramp momentum linearly from 0.5 to `momentum` over the first 10% of
    /// epochs.
    pub momentum_ramp: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 0.01,
            momentum: 0.90,
            epochs: 500,
            batch_size: 16,
            seed: 0,
            clip_norm: None,
            momentum_ramp: false,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), NnetError> {
        let bad = |m: &str| Err(NnetError::InvalidConfig(m.to_string()));
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return bad("learning rate must be non-negative");
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return bad("momentum must be in [0, 1)");
        }
        if self.epochs < 1 {
            return bad("epochs must be at least 1");
        }
        if self.batch_size < 1 {
            return bad("batch size must be at least 1");
        }
        if let Some(c) = self.clip_norm {
            if !(c > 0.0) {
                return bad("clip norm must be positive");
            }
        }
        Ok(())
    }

    /// Momentum used during `epoch` (0-based).
    pub fn momentum_at(&self, epoch: usize) -> f64 {
        if !self.momentum_ramp {
            return self.momentum;
        }
        let ramp = (self.epochs as f64 * 0.1).ceil().max(1.0);
        let start = 0.5f64.min(self.momentum);
        let frac = (epoch as f64 / ramp).min(1.0);
        start + (self.momentum - start) * frac
    }
}

/// Per-epoch mean loss and training accuracy (fraction in [0, 1]), both
/// measured on the forward passes that produced each epoch's updates.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainHistory {
    pub loss: Vec<f64>,
    pub accuracy: Vec<f64>,
}

/// `v <- momentum * v + g; theta <- theta - lr * v`, after clipping `g` to
/// global norm `clip_norm` when set.
pub fn sgdm_update(
    model: &mut BiLstmModel,
    grads: &Gradients,
    velocity: &mut Gradients,
    learning_rate: f64,
    momentum: f64,
    clip_norm: Option<f64>,
) {
    let mut scale = 1.0;
    if let Some(clip) = clip_norm {
        let norm = grads.squared_norm().sqrt();
        if norm > clip {
            scale = clip / norm;
        }
    }
    for ((theta, v), (_, g)) in model
        .blocks_mut()
        .into_iter()
        .zip(velocity.blocks_mut())
        .zip(grads.blocks())
    {
        for ((t, vk), gk) in theta.iter_mut().zip(v.iter_mut()).zip(g) {
            *vk = momentum * *vk + scale * gk;
            *t -= learning_rate * *vk;
        }
    }
}

/// One SGDM step with the settings of `config`.
pub fn sgdm_step(model: &mut BiLstmModel, grads: &Gradients, velocity: &mut Gradients, config: &TrainConfig) {
    sgdm_update(model, grads, velocity, config.learning_rate, config.momentum, config.clip_norm);
}

fn class_of(seq: &FeatureSequence) -> Result<usize, NnetError> {
    seq.label
        .class_index()
        .ok_or_else(|| NnetError::UnlabeledExample(seq.id.clone()))
}

/// Trains a fresh model. Fully determined by the dataset order, `hidden` and
/// `config` (including its seed).
pub fn train(
    dataset: &[FeatureSequence],
    hidden: usize,
    config: &TrainConfig,
) -> Result<(BiLstmModel, TrainHistory), NnetError> {
    config.validate()?;
    let init = init_model_with_input(NUM_FEATURES, hidden, seed::derive(config.seed, 0));
    train_from(init, dataset, config)
}

/// Trains starting from `model`.
pub fn train_from(
    mut model: BiLstmModel,
    dataset: &[FeatureSequence],
    config: &TrainConfig,
) -> Result<(BiLstmModel, TrainHistory), NnetError> {
    config.validate()?;
    if dataset.len() < 2 {
        return Err(NnetError::TooFewExamples(dataset.len()));
    }
    let labels: Vec<usize> = dataset.iter().map(class_of).collect::<Result<_, _>>()?;
    if !(labels.contains(&0) && labels.contains(&1)) {
        return Err(NnetError::SingleClassDataset);
    }
    if let Some(s) = dataset.iter().find(|s| s.is_empty()) {
        return Err(NnetError::EmptyExample(s.id.clone()));
    }

    let mut rng = seed::rng(seed::derive(config.seed, 1));
    let mut velocity = model.zeros_like();
    let mut order: Vec<usize> = (0..dataset.len()).collect();
    let mut history = TrainHistory::default();
    let bs = config.batch_size.min(dataset.len());

    for epoch in 0..config.epochs {
        order.shuffle(&mut rng);
        let momentum = config.momentum_at(epoch);
        let mut loss_sum = 0.0;
        let mut correct = 0usize;
        for chunk in order.chunks(bs) {
            let batch: Vec<(&[[f64; NUM_FEATURES]], usize)> = chunk
                .iter()
                .map(|&i| (dataset[i].rows.as_slice(), labels[i]))
                .collect();
            let (mean_loss, probs, grads) = batch_gradients(&model, &batch)?;
            loss_sum += mean_loss * chunk.len() as f64;
            correct += probs
                .iter()
                .zip(&batch)
                .filter(|(p, (_, y))| argmax(p) == *y)
                .count();
            sgdm_update(&mut model, &grads, &mut velocity, config.learning_rate, momentum, config.clip_norm);
        }
        history.loss.push(loss_sum / dataset.len() as f64);
        history.accuracy.push(correct as f64 / dataset.len() as f64);
    }
    Ok((model, history))
}

/// Index of the larger probability; ties go to class 0 (Healthy).
pub fn argmax(p: &[f64; 2]) -> usize {
    usize::from(p[1] > p[0])
}

pub fn predict(model: &BiLstmModel, seq: &FeatureSequence) -> Result<usize, NnetError> {
    let cache = forward(model, &seq.rows)?;
    Ok(argmax(&cache.probabilities))
}

/// Class probabilities `[healthy, pathological]`.
pub fn predict_proba(model: &BiLstmModel, seq: &FeatureSequence) -> Result<[f64; 2], NnetError> {
    Ok(forward(model, &seq.rows)?.probabilities)
}
