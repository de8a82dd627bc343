use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::backprop::loss_and_gradients;
use super::model::classify;
use super::{EmotionLabel, FrameSequence, ModelParams};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub steps: usize,
    pub batch_size: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self { learning_rate: 0.05, steps: 2000, batch_size: 16 }
    }
}

/// Plain mini-batch gradient descent on a private copy of `params`.
pub fn train(
    params: &ModelParams,
    dataset: &[(FrameSequence, EmotionLabel)],
    config: &TrainConfig,
    seed: u64,
) -> Result<ModelParams> {
    train_with(params, dataset, config, seed, |_, _, _| {})
}

/// Like [`train`], calling `on_step(step, loss, params)` after every update.
///
/// Batches are drawn in order from a seeded shuffle of the dataset, which
/// is reshuffled once exhausted. `loss` is the batch loss before the update.
pub fn train_with(
    params: &ModelParams,
    dataset: &[(FrameSequence, EmotionLabel)],
    config: &TrainConfig,
    seed: u64,
    mut on_step: impl FnMut(usize, f64, &ModelParams),
) -> Result<ModelParams> {
    if !(config.learning_rate.is_finite() && config.learning_rate > 0.0) {
        return Err(Error::invalid("learning rate must be positive"));
    }
    if config.batch_size == 0 {
        return Err(Error::invalid("batch size must be positive"));
    }
    let mut params = params.clone();
    if config.steps == 0 {
        return Ok(params);
    }
    if dataset.is_empty() {
        return Err(Error::invalid("training set is empty"));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..dataset.len()).collect();
    let mut cursor = order.len();
    let mut batch = Vec::with_capacity(config.batch_size);
    for step in 0..config.steps {
        batch.clear();
        while batch.len() < config.batch_size.min(dataset.len()) {
            if cursor == order.len() {
                order.shuffle(&mut rng);
                cursor = 0;
            }
            batch.push(dataset[order[cursor]].clone());
            cursor += 1;
        }
        let (loss, grads) = loss_and_gradients(&params, &batch)?;
        if !loss.is_finite() {
            return Err(Error::Diverged { step, loss });
        }
        params.add_scaled(&grads, -config.learning_rate);
        if let Err(Error::InvalidState(_)) = params.validate() {
            return Err(Error::Diverged { step, loss: f64::NAN });
        }
        on_step(step, loss, &params);
    }
    Ok(params)
}

/// Fraction of `dataset` whose argmax prediction equals its label.
pub fn accuracy(params: &ModelParams, dataset: &[(FrameSequence, EmotionLabel)]) -> Result<f64> {
    if dataset.is_empty() {
        return Ok(0.0);
    }
    let mut correct = 0;
    for (seq, label) in dataset {
        if classify(params, seq)?.argmax == *label {
            correct += 1;
        }
    }
    Ok(correct as f64 / dataset.len() as f64)
}
