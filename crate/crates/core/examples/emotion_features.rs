//! Turn a waveform into log band energies and classify it with an untrained model.

use std::f64::consts::PI;

use fitbot::emotion::{classify, extract_features, Dims, FeatureConfig, LabelNames, ModelParams};

fn main() -> fitbot::Result<()> {
    let rate = 16_000.0;
    // 300 ms chirp from 200 Hz to 3 kHz.
    let n = (0.3 * rate) as usize;
    let wave: Vec<f64> = (0..n)
        .map(|i| {
            let t = i as f64 / rate;
            (2.0 * PI * (200.0 * t + 0.5 * (2800.0 / 0.3) * t * t)).sin()
        })
        .collect();

    let config = FeatureConfig::default();
    let mut seq = extract_features(&wave, rate, &config)?;
    seq.utterance_id = "chirp".into();
    println!("{} frames of {} bands, hop {} ms", seq.len(), config.bands, seq.frame_hop_ms);
    for (i, frame) in seq.frames.iter().enumerate().step_by(5) {
        let cells: Vec<String> = frame.iter().map(|v| format!("{v:5.1}")).collect();
        println!("  frame {i:2}: {}", cells.join(" "));
    }

    let params = ModelParams::init(Dims::new(config.bands, 16), 1);
    let score = classify(&params, &seq)?;
    let names = LabelNames::default();
    println!("untrained prediction: {} (p = {:.4})", names.name(score.argmax), score.probabilities[score.argmax.index()]);
    Ok(())
}
