//! Speech emotion recognition over 21 classes.
//!
//! Frames of log band energies run through a gated recurrent cell; an
//! additive attention layer weighs the hidden states and pools them into a
//! context vector, which a softmax layer maps to class probabilities.

mod backprop;
pub mod dataset;
mod features;
mod gradcheck;
mod matrix;
mod model;
pub mod toy;
mod train;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use backprop::{loss, loss_and_gradients};
pub use features::{extract_features, FeatureConfig};
pub use gradcheck::{gradcheck_instance, gradient_check, relative_error, GradCheckReport, RELATIVE_FLOOR};
pub use matrix::Matrix;
pub use model::{
    attention_pool, classify, rnn_forward, softmax, Dims, ModelParams, Pooled, INIT_RANGE,
};
pub use train::{accuracy, train, train_with, TrainConfig};

/// Number of emotion classes the classifier distinguishes.
pub const CLASS_COUNT: usize = 21;

/// A sequence of acoustic feature frames for one utterance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameSequence {
    pub utterance_id: String,
    pub frame_hop_ms: f64,
    pub frames: Vec<Vec<f64>>,
}

impl FrameSequence {
    pub fn new(utterance_id: impl Into<String>, frame_hop_ms: f64, frames: Vec<Vec<f64>>) -> Self {
        Self { utterance_id: utterance_id.into(), frame_hop_ms, frames }
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    /// Frame dimension, if there is at least one frame.
    pub fn dim(&self) -> Option<usize> {
        self.frames.first().map(Vec::len)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.frame_hop_ms.is_finite() && self.frame_hop_ms > 0.0) {
            return Err(Error::invalid("frame hop must be positive"));
        }
        let dim = self.dim().unwrap_or(1);
        if dim == 0 {
            return Err(Error::invalid("frame dimension must be at least 1"));
        }
        for (t, frame) in self.frames.iter().enumerate() {
            if frame.len() != dim {
                return Err(Error::invalid(format!(
                    "frame {t} has dimension {}, expected {dim}",
                    frame.len()
                )));
            }
            if frame.iter().any(|v| !v.is_finite()) {
                return Err(Error::invalid(format!("frame {t} has a non-finite value")));
            }
        }
        Ok(())
    }
}

/// Index of one of the [`CLASS_COUNT`] emotion classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub struct EmotionLabel(u8);

impl EmotionLabel {
    pub fn new(index: usize) -> Result<Self> {
        if index < CLASS_COUNT {
            Ok(Self(index as u8))
        } else {
            Err(Error::invalid(format!(
                "label index {index} out of range 0..{CLASS_COUNT}"
            )))
        }
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn all() -> impl Iterator<Item = EmotionLabel> {
        (0..CLASS_COUNT as u8).map(EmotionLabel)
    }
}

impl TryFrom<usize> for EmotionLabel {
    type Error = Error;

    fn try_from(index: usize) -> Result<Self> {
        Self::new(index)
    }
}

impl From<EmotionLabel> for usize {
    fn from(label: EmotionLabel) -> usize {
        label.index()
    }
}

/// Display names for the classes, `emotion_00` .. `emotion_20` unless edited.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelNames(Vec<String>);

impl Default for LabelNames {
    fn default() -> Self {
        Self((0..CLASS_COUNT).map(|i| format!("emotion_{i:02}")).collect())
    }
}

impl LabelNames {
    pub fn new(names: Vec<String>) -> Result<Self> {
        if names.len() != CLASS_COUNT {
            return Err(Error::invalid(format!(
                "expected {CLASS_COUNT} label names, got {}",
                names.len()
            )));
        }
        Ok(Self(names))
    }

    pub fn name(&self, label: EmotionLabel) -> &str {
        &self.0[label.index()]
    }

    pub fn rename(&mut self, label: EmotionLabel, name: impl Into<String>) {
        self.0[label.index()] = name.into();
    }
}

/// Probability distribution over the emotion classes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmotionScore {
    pub probabilities: Vec<f64>,
    pub argmax: EmotionLabel,
}

impl EmotionScore {
    /// Builds a score from probabilities; ties in the argmax go to the lowest index.
    pub fn from_probabilities(probabilities: Vec<f64>) -> Result<Self> {
        if probabilities.len() != CLASS_COUNT {
            return Err(Error::invalid(format!(
                "expected {CLASS_COUNT} probabilities, got {}",
                probabilities.len()
            )));
        }
        if probabilities.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::invalid("probabilities must lie in [0, 1]"));
        }
        let sum: f64 = probabilities.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::invalid(format!("probabilities sum to {sum}, not 1")));
        }
        let argmax = EmotionLabel::new(argmax(&probabilities))?;
        Ok(Self { probabilities, argmax })
    }
}

/// Index of the largest value, lowest index on ties.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    best
}
