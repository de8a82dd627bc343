//! Run configuration.
//!
//! One JSON document with a section per subcommand group. Every field is
//! optional in the file and takes the module default when omitted; command
//! line flags override file values.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::curation::Thresholds;
use crate::eeg::{BlinkParams, SyntheticEeg, DEFAULT_TOLERANCE_MS};
use crate::emotion::TrainConfig;
use crate::protocol::DEFAULT_LATENCY_BUDGET_MS;
use crate::{Error, Result};

pub const DEFAULT_SEED: u64 = 7;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub eeg: EegConfig,
    pub emotion: EmotionConfig,
    pub sim: SimSection,
    pub curate: CurateConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: DEFAULT_SEED,
            eeg: EegConfig::default(),
            emotion: EmotionConfig::default(),
            sim: SimSection::default(),
            curate: CurateConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text)
            .map_err(|e| Error::Configuration(format!("{}: {e}", path.display())))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes") + "\n"
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EegConfig {
    pub synthetic: SyntheticEeg,
    pub params: BlinkParams,
    pub tolerance_ms: f64,
    /// `eeg eval` exits with status 3 when recall falls below this.
    pub recall_floor: f64,
    /// Trace for `eeg detect`; defaults to the `eeg gen` output.
    pub input: Option<PathBuf>,
    pub events: Option<PathBuf>,
    pub truth: Option<PathBuf>,
}

impl Default for EegConfig {
    fn default() -> Self {
        Self {
            synthetic: SyntheticEeg::default(),
            params: BlinkParams::default(),
            tolerance_ms: DEFAULT_TOLERANCE_MS,
            recall_floor: 0.85,
            input: None,
            events: None,
            truth: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GradCheckConfig {
    pub input_dim: usize,
    pub hidden_dim: usize,
    pub frames: usize,
    pub batch: usize,
    pub epsilon: f64,
    pub tolerance: f64,
}

impl Default for GradCheckConfig {
    fn default() -> Self {
        Self { input_dim: 3, hidden_dim: 4, frames: 5, batch: 2, epsilon: 1e-5, tolerance: 1e-4 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EmotionConfig {
    pub hidden_dim: usize,
    pub train: TrainConfig,
    /// Size of the generated toy set used when no dataset directory is given.
    pub toy_sequences: usize,
    pub dataset: Option<PathBuf>,
    /// Steps between training-accuracy evaluations in the loss curve.
    pub eval_every: usize,
    /// `emotion train` exits with status 3 below this final accuracy.
    pub accuracy_floor: Option<f64>,
    pub params: Option<PathBuf>,
    pub input: Option<PathBuf>,
    pub gradcheck: GradCheckConfig,
}

impl Default for EmotionConfig {
    fn default() -> Self {
        Self {
            hidden_dim: 32,
            train: TrainConfig::default(),
            toy_sequences: 200,
            dataset: None,
            eval_every: 100,
            accuracy_floor: None,
            params: None,
            input: None,
            gradcheck: GradCheckConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimSection {
    /// Topology JSON; a 5 ms / 10 ms device-edge-cloud chain when absent.
    pub topology: Option<PathBuf>,
    /// Workload JSON; a generated demo workload when absent.
    pub workload: Option<PathBuf>,
    /// Model parameters for both recognizers; seeded initial weights when absent.
    pub params: Option<PathBuf>,
    pub latency_budget_ms: f64,
}

impl Default for SimSection {
    fn default() -> Self {
        Self { topology: None, workload: None, params: None, latency_budget_ms: DEFAULT_LATENCY_BUDGET_MS }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CurateConfig {
    /// Existing dataset (JSON lines); starts empty when absent.
    pub dataset: Option<PathBuf>,
    /// Candidates to screen, in order (JSON lines).
    pub candidates: Option<PathBuf>,
    pub thresholds: Thresholds,
}
