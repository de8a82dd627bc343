//! Oracles and fixtures shared by the integration tests.
#![allow(dead_code, clippy::needless_range_loop)]

use fitbot::curation::{CurationSample, CurationDataset};
use fitbot::eeg::EegTrace;
use fitbot::emotion::{EmotionScore, FrameSequence, CLASS_COUNT};
use fitbot::protocol::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn brute_difference(x: &[f64]) -> Vec<f64> {
    let mut out = Vec::new();
    let mut i = 0;
    while i + 1 < x.len() {
        out.push(x[i + 1] - x[i]);
        i += 1;
    }
    out
}

pub fn brute_smooth(d: &[f64], threshold: f64) -> Vec<f64> {
    let mut out = vec![0.0; d.len()];
    for i in 0..d.len() {
        let m = if d[i] < 0.0 { -d[i] } else { d[i] };
        if m >= threshold {
            out[i] = m;
        }
    }
    out
}

/// Random trace with integer-valued samples in ADC range, mixing spikes in.
pub fn random_trace(rng: &mut ChaCha8Rng) -> EegTrace {
    let len = rng.gen_range(2..400);
    let samples = (0..len)
        .map(|_| {
            if rng.gen_bool(0.05) {
                rng.gen_range(-2000.0..2000.0f64).round()
            } else {
                rng.gen_range(-100.0..100.0f64)
            }
        })
        .collect();
    EegTrace::new(samples, [25.0, 250.0, 500.0][rng.gen_range(0..3)]).unwrap()
}

pub fn random_sequence(rng: &mut ChaCha8Rng, frames: usize, dim: usize) -> FrameSequence {
    let frames = (0..frames)
        .map(|_| (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect())
        .collect();
    FrameSequence::new(format!("utt_{}", rng.gen::<u16>()), 10.0, frames)
}

pub fn random_score(rng: &mut ChaCha8Rng) -> EmotionScore {
    let raw: Vec<f64> = (0..CLASS_COUNT).map(|_| rng.gen_range(0.01..1.0)).collect();
    let sum: f64 = raw.iter().sum();
    let mut probs: Vec<f64> = raw.iter().map(|v| v / sum).collect();
    let rest: f64 = probs[1..].iter().sum();
    probs[0] = 1.0 - rest;
    EmotionScore::from_probabilities(probs).unwrap()
}

pub fn random_node(rng: &mut ChaCha8Rng) -> NodeId {
    let index = rng.gen();
    match rng.gen_range(0..3) {
        0 => NodeId::device(index),
        1 => NodeId::edge(index),
        _ => NodeId::cloud(index),
    }
}

pub fn random_message(rng: &mut ChaCha8Rng) -> EmotionMessage {
    let payload = match rng.gen_range(0..3) {
        0 => {
            let frames = rng.gen_range(1..20);
            let dim = rng.gen_range(1..10);
            let seq = random_sequence(rng, frames, dim);
            Payload::Request(RequestPayload::for_sequence(&seq).unwrap())
        }
        1 => Payload::Result(WireScore::from(&random_score(rng))),
        _ => Payload::Ack { acked_seq: rng.gen() },
    };
    EmotionMessage {
        version: PROTOCOL_VERSION,
        seq: rng.gen(),
        timestamp_ms: rng.gen(),
        source: random_node(rng),
        dest: random_node(rng),
        route: RouteMode::ALL[rng.gen_range(0..3)],
        payload,
    }
}

pub fn sample(id: &str, features: Vec<f64>, class: usize, confidence: f64) -> CurationSample {
    let rest = (1.0 - confidence) / (CLASS_COUNT - 1) as f64;
    let mut soft_label = vec![rest; CLASS_COUNT];
    soft_label[class] = confidence;
    CurationSample { id: id.into(), features, soft_label }
}

/// Two tight clusters in 4-D, one per class, with confident labels.
pub fn seed_dataset() -> CurationDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut samples = Vec::new();
    for i in 0..20 {
        let class = i % 2;
        let base = if class == 0 { [1.0, 0.0, 0.0, 0.2] } else { [0.0, 1.0, 0.2, 0.0] };
        let features = base.iter().map(|b| b + rng.gen_range(-0.05..0.05)).collect();
        samples.push(sample(&format!("seed_{i}"), features, class, 0.9));
    }
    CurationDataset::from_samples(samples).unwrap()
}

pub fn full_centroid(dataset: &CurationDataset, class: usize) -> Option<Vec<f64>> {
    let members: Vec<&CurationSample> =
        dataset.samples().iter().filter(|s| s.class() == class).collect();
    if members.is_empty() {
        return None;
    }
    let dim = members[0].features.len();
    let mut c = vec![0.0; dim];
    for m in &members {
        for j in 0..dim {
            c[j] += m.features[j];
        }
    }
    Some(c.into_iter().map(|v| v / members.len() as f64).collect())
}

pub fn single_request(sequence: FrameSequence, quality: Quality) -> Workload {
    Workload {
        requests: vec![WorkItem { send_time_ms: 0.0, device: NodeId::device(0), quality, sequence }],
    }
}

pub mod cli {
    use std::collections::BTreeMap;
    use std::path::Path;
    use std::process::{Command, Output};

    pub fn fitbot(dir: &Path, args: &[&str]) -> Output {
        Command::new(env!("CARGO_BIN_EXE_fitbot"))
            .current_dir(dir)
            .args(args)
            .output()
            .expect("binary runs")
    }

    fn ok(dir: &Path, args: &[&str]) {
        let out = fitbot(dir, args);
        assert_eq!(
            out.status.code(),
            Some(0),
            "{args:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    }

    /// Runs every pipeline under `dir` and returns the artifacts it wrote.
    pub fn run_all(dir: &Path, seed: &str) -> BTreeMap<String, Vec<u8>> {
        let s = ["--seed", seed];
        let with = |extra: &[&'static str]| -> Vec<&str> { s.iter().copied().chain(extra.iter().copied()).collect() };

        ok(dir, &with(&["--out", "eeg", "eeg", "gen"]));
        ok(dir, &with(&["--out", "eeg", "eeg", "detect"]));
        ok(dir, &with(&["--out", "eeg", "eeg", "eval"]));

        ok(dir, &with(&["--out", "emo", "emotion", "train", "--steps", "60", "--hidden", "8"]));
        let toy = fitbot::emotion::toy::separable_toy_set(1, 5).unwrap();
        std::fs::write(dir.join("utt.json"), serde_json::to_string(&toy[0].0).unwrap()).unwrap();
        ok(dir, &with(&["--out", "emo", "emotion", "classify", "--input", "utt.json"]));
        ok(dir, &with(&["--out", "grad", "emotion", "gradcheck"]));

        ok(dir, &with(&["--out", "sim", "sim", "run"]));

        let dataset = super::seed_dataset();
        std::fs::write(dir.join("seed.jsonl"), fitbot::curation::io::samples_to_jsonl(dataset.samples())).unwrap();
        let candidates = vec![
            super::sample("near", vec![1.01, 0.0, 0.01, 0.21], 0, 0.9),
            super::sample("far", vec![0.0, 0.0, -1.0, -3.0], 0, 0.9),
            super::sample("vague", vec![0.0, 1.0, 0.2, 0.0], 1, 0.1),
        ];
        std::fs::write(dir.join("cand.jsonl"), fitbot::curation::io::samples_to_jsonl(&candidates)).unwrap();
        ok(dir, &with(&["--out", "cur", "curate", "run", "--dataset", "seed.jsonl", "--candidates", "cand.jsonl"]));

        let mut artifacts = BTreeMap::new();
        for sub in ["eeg", "emo", "grad", "sim", "cur"] {
            for entry in std::fs::read_dir(dir.join(sub)).unwrap() {
                let path = entry.unwrap().path();
                let name = format!("{sub}/{}", path.file_name().unwrap().to_string_lossy());
                artifacts.insert(name, std::fs::read(&path).unwrap());
            }
        }
        artifacts
    }
}
