use serde::{Deserialize, Serialize};

use super::EegTrace;
use crate::{Error, Result};

/// Tuning of the blink judgment step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BlinkParams {
    /// Difference magnitudes below this are zeroed (raw ADC units).
    pub threshold: f64,
    /// Nonzero samples closer than this belong to the same event.
    pub merge_gap_ms: f64,
    /// Minimum spacing between two accepted events.
    pub refractory_ms: f64,
}

impl Default for BlinkParams {
    fn default() -> Self {
        Self {
            threshold: 150.0,
            merge_gap_ms: 200.0,
            refractory_ms: 300.0,
        }
    }
}

impl BlinkParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.threshold.is_finite() && self.threshold >= 0.0) {
            return Err(Error::invalid(format!(
                "threshold must be non-negative, got {}",
                self.threshold
            )));
        }
        if !(self.merge_gap_ms.is_finite() && self.merge_gap_ms > 0.0) {
            return Err(Error::invalid("merge gap must be positive"));
        }
        if !(self.refractory_ms.is_finite() && self.refractory_ms >= self.merge_gap_ms) {
            return Err(Error::invalid("refractory period must be at least the merge gap"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlinkEvent {
    pub peak_time_ms: f64,
    /// Magnitude of the differenced signal at the peak.
    pub peak_magnitude: f64,
}

/// `out[i] = x[i + 1] - x[i]`. The output keeps the input's rate and
/// metadata; its sample `i` spans input samples `i` and `i + 1`.
pub fn first_difference(trace: &EegTrace) -> Result<EegTrace> {
    if trace.len() < 2 {
        return Err(Error::invalid(format!(
            "first difference needs at least 2 samples, got {}",
            trace.len()
        )));
    }
    let diff = trace.samples.windows(2).map(|w| w[1] - w[0]).collect();
    Ok(trace.with_samples(diff))
}

/// Keeps `|x|` where `|x| >= threshold` and zeroes everything else.
pub fn amplitude_smooth(diff: &EegTrace, threshold: f64) -> Result<EegTrace> {
    if threshold.is_nan() || threshold < 0.0 {
        return Err(Error::invalid(format!("threshold must be non-negative, got {threshold}")));
    }
    let smoothed = diff
        .samples
        .iter()
        .map(|v| if v.abs() >= threshold { v.abs() } else { 0.0 })
        .collect();
    Ok(diff.with_samples(smoothed))
}

/// Runs difference, smoothing and judgment over `trace`.
///
/// Nonzero smoothed samples are grouped while consecutive ones are less
/// than `merge_gap_ms` apart. Each group produces one event at its largest
/// magnitude (earliest on ties), placed at the midpoint of the two samples
/// that produced that difference. An event less than `refractory_ms` after
/// the previously accepted one is discarded.
pub fn detect_blinks(trace: &EegTrace, params: &BlinkParams) -> Result<Vec<BlinkEvent>> {
    params.validate()?;
    trace.validate()?;
    let smoothed = amplitude_smooth(&first_difference(trace)?, params.threshold)?;

    let time_of = |i: usize| {
        trace.start_time_ms as f64 + (2 * i + 1) as f64 * 500.0 / trace.sample_rate_hz
    };

    let mut groups: Vec<BlinkEvent> = Vec::new();
    let mut last_time: Option<f64> = None;
    for (i, &magnitude) in smoothed.samples.iter().enumerate() {
        if magnitude <= 0.0 {
            continue;
        }
        let t = time_of(i);
        match (last_time, groups.last_mut()) {
            (Some(prev), Some(group)) if t - prev < params.merge_gap_ms => {
                if magnitude > group.peak_magnitude {
                    group.peak_magnitude = magnitude;
                    group.peak_time_ms = t;
                }
            }
            _ => groups.push(BlinkEvent { peak_time_ms: t, peak_magnitude: magnitude }),
        }
        last_time = Some(t);
    }

    let mut events: Vec<BlinkEvent> = Vec::with_capacity(groups.len());
    for group in groups {
        match events.last() {
            Some(prev) if group.peak_time_ms - prev.peak_time_ms < params.refractory_ms => {}
            _ => events.push(group),
        }
    }
    Ok(events)
}
