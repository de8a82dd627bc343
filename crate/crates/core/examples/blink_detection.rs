//! Detect blinks in a synthetic single-channel recording and score them.
//!
//! cargo run --example blink_detection -- [seed]

use fitbot::eeg::{detect_blinks, evaluate_detection, first_difference, BlinkParams, SyntheticEeg, DEFAULT_TOLERANCE_MS};

fn main() -> fitbot::Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(7);
    let (trace, truth) = SyntheticEeg::default().generate(seed)?;
    println!("{} samples at {} Hz, {} injected blinks", trace.len(), trace.sample_rate_hz, truth.len());

    let diff = first_difference(&trace)?;
    let peak = diff.samples.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    println!("largest sample-to-sample step: {peak:.1}");

    let params = BlinkParams::default();
    let events = detect_blinks(&trace, &params)?;
    for e in &events {
        let nearest = truth.iter().map(|t| (t - e.peak_time_ms).abs()).fold(f64::INFINITY, f64::min);
        println!("  blink at {:8.1} ms  |d| = {:6.1}  (off by {nearest:.0} ms)", e.peak_time_ms, e.peak_magnitude);
    }
    let report = evaluate_detection(&events, &truth, DEFAULT_TOLERANCE_MS)?;
    println!("recall {:.3}, precision {:.3}", report.recall, report.precision);
    Ok(())
}
