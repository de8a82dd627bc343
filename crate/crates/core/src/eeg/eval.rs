use serde::{Deserialize, Serialize};

use super::BlinkEvent;
use crate::{Error, Result};

pub const DEFAULT_TOLERANCE_MS: f64 = 250.0;

/// Detections scored against ground-truth blink instants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionReport {
    pub true_blinks: usize,
    pub detected: usize,
    pub matched: usize,
    pub recall: f64,
    pub precision: f64,
    pub tolerance_ms: f64,
}

/// Greedy one-to-one matching in time order. Each detection claims the
/// nearest still-unmatched truth instant within `tolerance_ms` (earliest on
/// ties). Recall and precision are 1 when their denominator is zero.
pub fn evaluate_detection(
    events: &[BlinkEvent],
    truth_ms: &[f64],
    tolerance_ms: f64,
) -> Result<DetectionReport> {
    if !(tolerance_ms.is_finite() && tolerance_ms > 0.0) {
        return Err(Error::invalid(format!("tolerance must be positive, got {tolerance_ms}")));
    }
    if truth_ms.iter().any(|t| t.is_nan()) || truth_ms.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::invalid("truth instants must be sorted ascending"));
    }

    let mut order: Vec<f64> = events.iter().map(|e| e.peak_time_ms).collect();
    order.sort_by(f64::total_cmp);

    let mut claimed = vec![false; truth_ms.len()];
    let mut matched = 0;
    for t in order {
        let best = truth_ms
            .iter()
            .enumerate()
            .filter(|(i, truth)| !claimed[*i] && (*truth - t).abs() <= tolerance_ms)
            .min_by(|a, b| (a.1 - t).abs().total_cmp(&(b.1 - t).abs()));
        if let Some((i, _)) = best {
            claimed[i] = true;
            matched += 1;
        }
    }

    let ratio = |n: usize, d: usize| if d == 0 { 1.0 } else { n as f64 / d as f64 };
    Ok(DetectionReport {
        true_blinks: truth_ms.len(),
        detected: events.len(),
        matched,
        recall: ratio(matched, truth_ms.len()),
        precision: ratio(matched, events.len()),
        tolerance_ms,
    })
}
