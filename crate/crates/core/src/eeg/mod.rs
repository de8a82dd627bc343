//! Single-channel EEG traces and blink detection.
//!
//! Detection runs three stages over the time-domain signal: the first-order
//! difference, amplitude smoothing (magnitudes below a threshold are zeroed),
//! and a judgment step that groups the surviving samples into blink events.

mod detect;
mod eval;
pub mod io;
mod synth;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use detect::{amplitude_smooth, detect_blinks, first_difference, BlinkEvent, BlinkParams};
pub use eval::{evaluate_detection, DetectionReport, DEFAULT_TOLERANCE_MS};
pub use synth::{benchmark_blink_times, generate_synthetic_eeg, SyntheticEeg, BLINK_WIDTH_MS};

/// Names of the three electrodes of a one-channel headset.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ElectrodeConfig {
    pub collecting: String,
    pub reference: String,
    pub bias: String,
}

impl ElectrodeConfig {
    pub fn new(
        collecting: impl Into<String>,
        reference: impl Into<String>,
        bias: impl Into<String>,
    ) -> Result<Self> {
        let config = Self {
            collecting: collecting.into(),
            reference: reference.into(),
            bias: bias.into(),
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        let names = [&self.collecting, &self.reference, &self.bias];
        if names.iter().any(|n| n.trim().is_empty()) {
            return Err(Error::invalid("electrode names must be non-empty"));
        }
        if self.collecting == self.reference
            || self.collecting == self.bias
            || self.reference == self.bias
        {
            return Err(Error::invalid("electrode names must be pairwise distinct"));
        }
        Ok(())
    }
}

impl Default for ElectrodeConfig {
    fn default() -> Self {
        Self {
            collecting: "IN1P".into(),
            reference: "REF".into(),
            bias: "BIAS1".into(),
        }
    }
}

/// A uniformly sampled single-channel signal in raw ADC units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EegTrace {
    pub sample_rate_hz: f64,
    pub start_time_ms: u64,
    pub electrodes: ElectrodeConfig,
    pub samples: Vec<f64>,
}

impl EegTrace {
    pub fn new(samples: Vec<f64>, sample_rate_hz: f64) -> Result<Self> {
        let trace = Self {
            sample_rate_hz,
            start_time_ms: 0,
            electrodes: ElectrodeConfig::default(),
            samples,
        };
        trace.validate()?;
        Ok(trace)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sample_rate_hz.is_finite() && self.sample_rate_hz > 0.0) {
            return Err(Error::invalid(format!(
                "sample rate must be positive, got {}",
                self.sample_rate_hz
            )));
        }
        self.electrodes.validate()
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Time of sample `index` in milliseconds.
    pub fn time_at(&self, index: usize) -> f64 {
        self.start_time_ms as f64 + index as f64 * 1000.0 / self.sample_rate_hz
    }

    /// Copy of this trace's metadata around new samples.
    pub(crate) fn with_samples(&self, samples: Vec<f64>) -> Self {
        Self {
            sample_rate_hz: self.sample_rate_hz,
            start_time_ms: self.start_time_ms,
            electrodes: self.electrodes.clone(),
            samples,
        }
    }
}
