use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::EegTrace;
use crate::{Error, Result};

/// Full width of the raised-cosine blink pulse.
pub const BLINK_WIDTH_MS: f64 = 300.0;

const NOISE_COMPONENTS: usize = 6;
const NOISE_LOW_HZ: f64 = 0.5;
const NOISE_HIGH_HZ: f64 = 8.0;

/// Generates a synthetic trace: seeded band-limited background noise with
/// peak `noise_amplitude`, plus one raised-cosine pulse of peak
/// `blink_amplitude` centred on each entry of `blink_times_ms`.
pub fn generate_synthetic_eeg(
    duration_ms: f64,
    sample_rate_hz: f64,
    blink_times_ms: &[f64],
    noise_amplitude: f64,
    blink_amplitude: f64,
    seed: u64,
) -> Result<EegTrace> {
    if !(duration_ms.is_finite() && duration_ms > 0.0) {
        return Err(Error::invalid(format!("duration must be positive, got {duration_ms}")));
    }
    if !(sample_rate_hz.is_finite() && sample_rate_hz > 0.0) {
        return Err(Error::invalid(format!("sample rate must be positive, got {sample_rate_hz}")));
    }
    if !(noise_amplitude.is_finite() && noise_amplitude >= 0.0) {
        return Err(Error::invalid("noise amplitude must be non-negative"));
    }
    if !(blink_amplitude.is_finite() && blink_amplitude > noise_amplitude) {
        return Err(Error::invalid(
            "blink amplitude must be positive and exceed the noise amplitude",
        ));
    }
    for pair in blink_times_ms.windows(2) {
        if pair[1] <= pair[0] {
            return Err(Error::invalid("blink times must be strictly increasing"));
        }
    }
    if let Some(t) = blink_times_ms.iter().find(|t| !(0.0..duration_ms).contains(*t)) {
        return Err(Error::invalid(format!("blink time {t} outside [0, {duration_ms})")));
    }

    let len = (duration_ms * sample_rate_hz / 1000.0).floor() as usize;
    let mut trace = EegTrace::new(vec![0.0; len], sample_rate_hz)?;
    if noise_amplitude > 0.0 {
        add_noise(&mut trace, noise_amplitude, seed);
    }
    let half_width = BLINK_WIDTH_MS / 2.0;
    for &blink in blink_times_ms {
        for (i, sample) in trace.samples.iter_mut().enumerate() {
            let offset = i as f64 * 1000.0 / sample_rate_hz - blink;
            if offset.abs() < half_width {
                *sample += blink_amplitude * 0.5 * (1.0 + (2.0 * PI * offset / BLINK_WIDTH_MS).cos());
            }
        }
    }
    Ok(trace)
}

fn add_noise(trace: &mut EegTrace, amplitude: f64, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let high = NOISE_HIGH_HZ.min(trace.sample_rate_hz / 4.0).max(NOISE_LOW_HZ);
    let components: Vec<(f64, f64, f64)> = (0..NOISE_COMPONENTS)
        .map(|_| {
            let freq = rng.gen_range(NOISE_LOW_HZ..=high);
            let phase = rng.gen_range(0.0..2.0 * PI);
            let weight = rng.gen_range(0.2..1.0);
            (freq, phase, weight)
        })
        .collect();
    let rate = trace.sample_rate_hz;
    let noise: Vec<f64> = (0..trace.len())
        .map(|i| {
            let t = i as f64 / rate;
            components
                .iter()
                .map(|(f, p, w)| w * (2.0 * PI * f * t + p).sin())
                .sum()
        })
        .collect();
    let peak = noise.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if peak > 0.0 {
        for (sample, n) in trace.samples.iter_mut().zip(noise) {
            *sample += amplitude * n / peak;
        }
    }
}

/// Ground-truth blink instants for a benchmark recording: one blink per
/// equal slot of the recording, placed at the slot centre plus a seeded
/// offset of at most a quarter slot.
pub fn benchmark_blink_times(count: usize, duration_ms: f64, seed: u64) -> Result<Vec<f64>> {
    if !(duration_ms.is_finite() && duration_ms > 0.0) {
        return Err(Error::invalid("duration must be positive"));
    }
    if count == 0 {
        return Ok(Vec::new());
    }
    let slot = duration_ms / count as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xB11C);
    Ok((0..count)
        .map(|k| {
            let jitter: f64 = rng.gen_range(-0.25..=0.25);
            ((k as f64 + 0.5 + jitter) * slot).round()
        })
        .collect())
}

/// Parameters of a synthetic benchmark recording.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticEeg {
    pub duration_ms: f64,
    pub sample_rate_hz: f64,
    pub blinks: usize,
    pub noise_amplitude: f64,
    pub blink_amplitude: f64,
}

impl Default for SyntheticEeg {
    fn default() -> Self {
        Self {
            duration_ms: 20_000.0,
            sample_rate_hz: 25.0,
            blinks: 20,
            noise_amplitude: 40.0,
            blink_amplitude: 600.0,
        }
    }
}

impl SyntheticEeg {
    /// Returns the trace and the injected blink times.
    pub fn generate(&self, seed: u64) -> Result<(EegTrace, Vec<f64>)> {
        let truth = benchmark_blink_times(self.blinks, self.duration_ms, seed)?;
        let trace = generate_synthetic_eeg(
            self.duration_ms,
            self.sample_rate_hz,
            &truth,
            self.noise_amplitude,
            self.blink_amplitude,
            seed,
        )?;
        Ok((trace, truth))
    }
}
