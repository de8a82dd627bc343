//! Admit or reject candidate samples against a small labelled dataset.

use fitbot::curation::{admit, purity, CurationDataset, CurationSample, Thresholds};
use fitbot::emotion::CLASS_COUNT;

fn soft(id: &str, features: Vec<f64>, class: usize, confidence: f64) -> CurationSample {
    let mut soft_label = vec![(1.0 - confidence) / (CLASS_COUNT - 1) as f64; CLASS_COUNT];
    soft_label[class] = confidence;
    CurationSample { id: id.into(), features, soft_label }
}

fn main() -> fitbot::Result<()> {
    let mut dataset = CurationDataset::from_samples(vec![
        soft("calm_a", vec![1.0, 0.1, 0.0], 0, 0.95),
        soft("calm_b", vec![0.9, 0.0, 0.1], 0, 0.9),
        soft("tense_a", vec![0.0, 1.0, 0.9], 1, 0.93),
    ])?;
    println!("start: {} samples, purity {:.3}", dataset.len(), purity(&dataset));

    let candidates = [
        soft("calm_c", vec![0.95, 0.05, 0.05], 0, 0.92),
        soft("odd", vec![-0.2, 0.1, 1.0], 0, 0.95),
        soft("unsure", vec![0.1, 0.9, 1.0], 1, 0.3),
        soft("tense_b", vec![0.1, 0.9, 1.0], 1, 0.97),
    ];
    let thresholds = Thresholds::default();
    for cand in &candidates {
        let (decision, next) = admit(cand, &dataset, &thresholds)?;
        println!(
            "{:<8} {:<14} sim {:.3}  purity {:.3} -> {:.3}",
            decision.id,
            decision.reason.as_str(),
            decision.similarity,
            decision.purity_before,
            decision.purity_after
        );
        dataset = next;
    }
    println!("end: {} samples", dataset.len());
    Ok(())
}
