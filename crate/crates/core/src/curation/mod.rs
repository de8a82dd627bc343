//! Admission control for unlabeled samples collected at the edge.
//!
//! A candidate carries the classifier's soft label from capture time. It
//! joins the dataset only if it is close enough (cosine) to the centroid of
//! its predicted class and adding it does not lower the dataset's purity,
//! the mean top-class confidence, by more than a tolerance.

mod admit;
pub mod io;

use serde::{Deserialize, Serialize};

use crate::emotion::{argmax, CLASS_COUNT};
use crate::{Error, Result};

pub use admit::{admit, purity, similarity, AdmissionDecision, Reason, Thresholds};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurationSample {
    pub id: String,
    pub features: Vec<f64>,
    pub soft_label: Vec<f64>,
}

impl CurationSample {
    pub fn validate(&self) -> Result<()> {
        if self.features.is_empty() || self.features.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("sample {}: features must be finite and non-empty", self.id)));
        }
        if self.soft_label.len() != CLASS_COUNT {
            return Err(Error::invalid(format!(
                "sample {}: soft label has {} entries, expected {CLASS_COUNT}",
                self.id,
                self.soft_label.len()
            )));
        }
        if self.soft_label.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::invalid(format!("sample {}: soft label outside [0, 1]", self.id)));
        }
        let sum: f64 = self.soft_label.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::invalid(format!("sample {}: soft label sums to {sum}", self.id)));
        }
        Ok(())
    }

    /// Predicted class, lowest index on ties.
    pub fn class(&self) -> usize {
        argmax(&self.soft_label)
    }

    pub fn confidence(&self) -> f64 {
        self.soft_label[self.class()]
    }
}

/// Samples plus per-class feature centroids, keyed by each sample's
/// predicted class. A class with no samples has no centroid.
#[derive(Debug, Clone, PartialEq)]
pub struct CurationDataset {
    samples: Vec<CurationSample>,
    centroids: Vec<Option<Vec<f64>>>,
    counts: Vec<usize>,
}

impl Default for CurationDataset {
    fn default() -> Self {
        Self::new()
    }
}

impl CurationDataset {
    pub fn new() -> Self {
        Self { samples: Vec::new(), centroids: vec![None; CLASS_COUNT], counts: vec![0; CLASS_COUNT] }
    }

    /// Builds a dataset, computing every centroid as a plain mean.
    pub fn from_samples(samples: Vec<CurationSample>) -> Result<Self> {
        let mut dim = None;
        for s in &samples {
            s.validate()?;
            check_dim(&mut dim, s)?;
        }
        let mut sums: Vec<Option<Vec<f64>>> = vec![None; CLASS_COUNT];
        let mut counts = vec![0; CLASS_COUNT];
        for s in &samples {
            let k = s.class();
            counts[k] += 1;
            let sum = sums[k].get_or_insert_with(|| vec![0.0; s.features.len()]);
            for (acc, v) in sum.iter_mut().zip(&s.features) {
                *acc += v;
            }
        }
        let centroids = sums
            .into_iter()
            .zip(&counts)
            .map(|(sum, &n)| sum.map(|v| v.into_iter().map(|x| x / n as f64).collect()))
            .collect();
        Ok(Self { samples, centroids, counts })
    }

    pub fn samples(&self) -> &[CurationSample] {
        &self.samples
    }

    pub fn centroid(&self, class: usize) -> Option<&[f64]> {
        self.centroids.get(class)?.as_deref()
    }

    pub fn class_count(&self, class: usize) -> usize {
        self.counts[class]
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn feature_dim(&self) -> Option<usize> {
        self.samples.first().map(|s| s.features.len())
    }

    /// Copy of the dataset with `sample` appended; only the sample's class
    /// centroid changes, by a running-mean update.
    pub fn with_sample(&self, sample: CurationSample) -> Result<Self> {
        sample.validate()?;
        let mut dim = self.feature_dim();
        check_dim(&mut dim, &sample)?;
        let mut next = self.clone();
        let k = sample.class();
        next.counts[k] += 1;
        let n = next.counts[k] as f64;
        match &mut next.centroids[k] {
            Some(c) => {
                for (m, x) in c.iter_mut().zip(&sample.features) {
                    *m += (x - *m) / n;
                }
            }
            slot @ None => *slot = Some(sample.features.clone()),
        }
        next.samples.push(sample);
        Ok(next)
    }
}

fn check_dim(dim: &mut Option<usize>, sample: &CurationSample) -> Result<()> {
    match *dim {
        Some(d) if d != sample.features.len() => Err(Error::invalid(format!(
            "sample {} has {} features, dataset has {d}",
            sample.id,
            sample.features.len()
        ))),
        _ => {
            *dim = Some(sample.features.len());
            Ok(())
        }
    }
}

/// A sample whose soft label puts all mass on `class`.
pub fn one_hot(id: impl Into<String>, features: Vec<f64>, class: usize) -> CurationSample {
    let mut soft_label = vec![0.0; CLASS_COUNT];
    soft_label[class] = 1.0;
    CurationSample { id: id.into(), features, soft_label }
}
