use serde::{Deserialize, Serialize};

use super::{CurationDataset, CurationSample};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Thresholds {
    /// Minimum cosine similarity to the candidate's class centroid.
    pub tau_sim: f64,
    /// Largest tolerated purity drop.
    pub epsilon: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self { tau_sim: 0.7, epsilon: 0.01 }
    }
}

impl Thresholds {
    pub fn validate(&self) -> Result<()> {
        if !(-1.0..=1.0).contains(&self.tau_sim) {
            return Err(Error::invalid(format!("tau_sim {} outside [-1, 1]", self.tau_sim)));
        }
        if !(self.epsilon.is_finite() && self.epsilon >= 0.0) {
            return Err(Error::invalid(format!("epsilon {} must be non-negative", self.epsilon)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Reason {
    Ok,
    LowSimilarity,
    PurityDrop,
}

impl Reason {
    pub fn as_str(self) -> &'static str {
        match self {
            Reason::Ok => "OK",
            Reason::LowSimilarity => "LOW_SIMILARITY",
            Reason::PurityDrop => "PURITY_DROP",
        }
    }
}

/// Verdict on one candidate. When the similarity test already fails,
/// `purity_after` repeats `purity_before`. A candidate for an empty
/// dataset reports similarity 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdmissionDecision {
    pub id: String,
    pub admitted: bool,
    pub similarity: f64,
    pub purity_before: f64,
    pub purity_after: f64,
    pub reason: Reason,
}

fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    (dot / (na * nb)).clamp(-1.0, 1.0)
}

/// Cosine similarity between the candidate and the centroid of its
/// predicted class, or the best cosine over all centroids when that class
/// has none yet.
pub fn similarity(candidate: &CurationSample, dataset: &CurationDataset) -> Result<f64> {
    candidate.validate()?;
    if candidate.features.iter().all(|&v| v == 0.0) {
        return Err(Error::invalid("candidate features are all zero"));
    }
    if let Some(d) = dataset.feature_dim() {
        if d != candidate.features.len() {
            return Err(Error::invalid(format!(
                "candidate has {} features, dataset has {d}",
                candidate.features.len()
            )));
        }
    }
    if let Some(centroid) = dataset.centroid(candidate.class()) {
        return Ok(cosine(&candidate.features, centroid));
    }
    dataset
        .centroids
        .iter()
        .flatten()
        .map(|c| cosine(&candidate.features, c))
        .reduce(f64::max)
        .ok_or(Error::EmptyDataset)
}

/// Mean top-class confidence; 1 for an empty dataset.
pub fn purity(dataset: &CurationDataset) -> f64 {
    if dataset.is_empty() {
        return 1.0;
    }
    dataset.samples.iter().map(CurationSample::confidence).sum::<f64>() / dataset.len() as f64
}

/// Decides whether `candidate` joins `dataset`, returning the verdict and
/// the resulting dataset (a copy, extended only on admission).
pub fn admit(
    candidate: &CurationSample,
    dataset: &CurationDataset,
    thresholds: &Thresholds,
) -> Result<(AdmissionDecision, CurationDataset)> {
    thresholds.validate()?;
    let purity_before = purity(dataset);
    let sim = match similarity(candidate, dataset) {
        Err(Error::EmptyDataset) => None,
        other => Some(other?),
    };
    let decision = |admitted, similarity, purity_after, reason| AdmissionDecision {
        id: candidate.id.clone(),
        admitted,
        similarity,
        purity_before,
        purity_after,
        reason,
    };

    let Some(sim) = sim else {
        let next = dataset.with_sample(candidate.clone())?;
        return Ok((decision(true, 1.0, purity(&next), Reason::Ok), next));
    };
    if sim < thresholds.tau_sim {
        return Ok((decision(false, sim, purity_before, Reason::LowSimilarity), dataset.clone()));
    }
    let next = dataset.with_sample(candidate.clone())?;
    let purity_after = purity(&next);
    if purity_after < purity_before - thresholds.epsilon {
        return Ok((decision(false, sim, purity_after, Reason::PurityDrop), dataset.clone()));
    }
    Ok((decision(true, sim, purity_after, Reason::Ok), next))
}
