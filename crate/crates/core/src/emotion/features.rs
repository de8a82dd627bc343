use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::FrameSequence;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FeatureConfig {
    pub window_ms: f64,
    pub hop_ms: f64,
    pub bands: usize,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self { window_ms: 25.0, hop_ms: 10.0, bands: 8 }
    }
}

/// Log band energies of a mono waveform.
///
/// Each window's one-sided DFT power `|X_k|^2` (bins `0..=n/2`) is summed
/// into `bands` equal-width bands spanning 0 Hz to Nyquist, and each band
/// energy `E` becomes `ln(1 + E)`. No taper is applied to the window.
pub fn extract_features(
    waveform: &[f64],
    sample_rate_hz: f64,
    config: &FeatureConfig,
) -> Result<FrameSequence> {
    if !(sample_rate_hz.is_finite() && sample_rate_hz > 0.0) {
        return Err(Error::invalid("sample rate must be positive"));
    }
    if !(config.window_ms > 0.0 && config.hop_ms > 0.0) || config.bands == 0 {
        return Err(Error::invalid("window, hop and band count must be positive"));
    }
    let window = (config.window_ms * sample_rate_hz / 1000.0).round() as usize;
    let hop = (config.hop_ms * sample_rate_hz / 1000.0).round() as usize;
    if window == 0 || hop == 0 {
        return Err(Error::invalid("window and hop must each span at least one sample"));
    }
    if waveform.len() < window {
        return Err(Error::invalid(format!(
            "waveform has {} samples, shorter than one {window}-sample window",
            waveform.len()
        )));
    }

    let fft = FftPlanner::<f64>::new().plan_fft_forward(window);
    let count = (waveform.len() - window) / hop + 1;
    let mut buffer = vec![Complex::new(0.0, 0.0); window];
    let mut frames = Vec::with_capacity(count);
    for f in 0..count {
        let start = f * hop;
        for (slot, &x) in buffer.iter_mut().zip(&waveform[start..start + window]) {
            *slot = Complex::new(x, 0.0);
        }
        fft.process(&mut buffer);
        let mut energy = vec![0.0; config.bands];
        for (k, bin) in buffer.iter().enumerate().take(window / 2 + 1) {
            energy[band_of(k, window, config.bands)] += bin.norm_sqr();
        }
        frames.push(energy.into_iter().map(f64::ln_1p).collect());
    }
    Ok(FrameSequence::new(String::new(), config.hop_ms, frames))
}

/// Band holding DFT bin `k` of an `n`-point transform.
pub(crate) fn band_of(k: usize, n: usize, bands: usize) -> usize {
    ((2 * k * bands) / n).min(bands - 1)
}
