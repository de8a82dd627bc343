//! A synthetic, linearly separable 21-class utterance set.
//!
//! Class `c` is the `c`-th pair (in lexicographic order) of the 8 feature
//! bands: its waveforms are two tones at those bands' centre frequencies
//! with seeded amplitudes and phases, over a little white noise.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{extract_features, EmotionLabel, FeatureConfig, FrameSequence, CLASS_COUNT};
use crate::Result;

pub const TOY_SAMPLE_RATE_HZ: f64 = 16_000.0;
pub const TOY_DURATION_MS: f64 = 120.0;
pub const TOY_BANDS: usize = 8;
const NOISE_LEVEL: f64 = 0.05;
/// Features are divided by this so inputs sit near unit scale.
pub const TOY_FEATURE_SCALE: f64 = 10.0;

/// The two bands that carry class `label`'s energy.
pub fn class_bands(label: EmotionLabel) -> (usize, usize) {
    let mut pairs = Vec::new();
    for a in 0..TOY_BANDS {
        for b in a + 1..TOY_BANDS {
            pairs.push((a, b));
        }
    }
    pairs[label.index()]
}

/// `count` labelled sequences, labels cycling through all classes.
pub fn separable_toy_set(count: usize, seed: u64) -> Result<Vec<(FrameSequence, EmotionLabel)>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let config = FeatureConfig { bands: TOY_BANDS, ..FeatureConfig::default() };
    let len = (TOY_DURATION_MS * TOY_SAMPLE_RATE_HZ / 1000.0) as usize;
    let band_width = TOY_SAMPLE_RATE_HZ / 2.0 / TOY_BANDS as f64;
    (0..count)
        .map(|i| {
            let label = EmotionLabel::new(i % CLASS_COUNT)?;
            let (a, b) = class_bands(label);
            let tones: Vec<(f64, f64, f64)> = [a, b]
                .iter()
                .map(|&band| {
                    let freq = (band as f64 + rng.gen_range(0.35..0.65)) * band_width;
                    (freq, rng.gen_range(0.5..1.0), rng.gen_range(0.0..2.0 * PI))
                })
                .collect();
            let waveform: Vec<f64> = (0..len)
                .map(|n| {
                    let t = n as f64 / TOY_SAMPLE_RATE_HZ;
                    let noise: f64 = rng.gen_range(-1.0..1.0) * NOISE_LEVEL;
                    tones.iter().map(|(f, amp, ph)| amp * (2.0 * PI * f * t + ph).sin()).sum::<f64>()
                        + noise
                })
                .collect();
            let mut seq = extract_features(&waveform, TOY_SAMPLE_RATE_HZ, &config)?;
            for frame in &mut seq.frames {
                frame.iter_mut().for_each(|v| *v /= TOY_FEATURE_SCALE);
            }
            seq.utterance_id = format!("toy_{i:04}");
            Ok((seq, label))
        })
        .collect()
}
