#![allow(clippy::needless_range_loop)]

mod common;

use common::random_sequence;
use fitbot::emotion::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn sig(a: f64) -> f64 {
    1.0 / (1.0 + (-a).exp())
}

/// Affine map `W x + U h + b` written out with index loops.
fn affine(w: &Matrix, x: &[f64], u: Option<(&Matrix, &[f64])>, b: &[f64], i: usize) -> f64 {
    let mut acc = b[i];
    for j in 0..x.len() {
        acc += w.get(i, j) * x[j];
    }
    if let Some((u, h)) = u {
        for j in 0..h.len() {
            acc += u.get(i, j) * h[j];
        }
    }
    acc
}

fn oracle_classify(p: &ModelParams, seq: &FrameSequence) -> (Vec<Vec<f64>>, Vec<f64>, Vec<f64>) {
    let hd = p.dims.hidden_dim;
    let mut h = vec![0.0; hd];
    let mut states = Vec::new();
    for x in &seq.frames {
        let mut next = vec![0.0; hd];
        for i in 0..hd {
            let z = sig(affine(&p.update_input, x, Some((&p.update_hidden, &h)), &p.update_bias, i));
            let c = affine(&p.candidate_input, x, Some((&p.candidate_hidden, &h)), &p.candidate_bias, i)
                .tanh();
            next[i] = (1.0 - z) * h[i] + z * c;
        }
        h = next;
        states.push(h.clone());
    }
    let mut scores = Vec::new();
    for s in &states {
        let mut e = 0.0;
        for i in 0..hd {
            e += p.attention_score[i] * affine(&p.attention_projection, s, None, &p.attention_bias, i).tanh();
        }
        scores.push(e);
    }
    let m = scores.iter().cloned().fold(f64::MIN, f64::max);
    let z: f64 = scores.iter().map(|e| (e - m).exp()).sum();
    let alpha: Vec<f64> = scores.iter().map(|e| (e - m).exp() / z).collect();
    let mut context = vec![0.0; hd];
    for (a, s) in alpha.iter().zip(&states) {
        for i in 0..hd {
            context[i] += a * s[i];
        }
    }
    let logits: Vec<f64> =
        (0..CLASS_COUNT).map(|k| affine(&p.output_weights, &context, None, &p.output_bias, k)).collect();
    let m = logits.iter().cloned().fold(f64::MIN, f64::max);
    let z: f64 = logits.iter().map(|l| (l - m).exp()).sum();
    (states, alpha, logits.iter().map(|l| (l - m).exp() / z).collect())
}

#[test]
fn forward_matches_unrolled_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for seed in 0..20 {
        let dims = Dims::new(rng.gen_range(1..6), rng.gen_range(1..8));
        let params = ModelParams::init_with_range(dims, 0.5, seed);
        let t = rng.gen_range(1..8);
        let seq = random_sequence(&mut rng, t, dims.input_dim);
        let (states, alpha, probs) = oracle_classify(&params, &seq);
        let hidden = rnn_forward(&params, &seq).unwrap();
        let pooled = attention_pool(&params, &hidden).unwrap();
        let score = classify(&params, &seq).unwrap();
        for (a, b) in hidden.iter().flatten().zip(states.iter().flatten()) {
            assert!((a - b).abs() < 1e-12);
        }
        for (a, b) in pooled.weights.iter().zip(&alpha) {
            assert!((a - b).abs() < 1e-12);
        }
        for (a, b) in score.probabilities.iter().zip(&probs) {
            assert!((a - b).abs() < 1e-12);
        }
        assert_eq!(score.argmax.index(), argmax(&probs));
    }
}

#[test]
fn attention_context_in_convex_hull() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for seed in 0..50 {
        let dims = Dims::new(3, 4);
        let params = ModelParams::init_with_range(dims, 1.0, seed);
        let hidden: Vec<Vec<f64>> = (0..rng.gen_range(1..=3))
            .map(|_| (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect();
        let pooled = attention_pool(&params, &hidden).unwrap();
        let total: f64 = pooled.weights.iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert!(pooled.weights.iter().all(|&a| (0.0..=1.0).contains(&a)));
        for i in 0..4 {
            let lo = hidden.iter().map(|h| h[i]).fold(f64::INFINITY, f64::min);
            let hi = hidden.iter().map(|h| h[i]).fold(f64::NEG_INFINITY, f64::max);
            assert!(pooled.context[i] >= lo - 1e-12 && pooled.context[i] <= hi + 1e-12);
        }
    }
}

#[test]
fn single_step_attention_is_identity() {
    let params = ModelParams::init(Dims::new(2, 3), 1);
    let h = vec![vec![0.3, -0.2, 0.9]];
    let pooled = attention_pool(&params, &h).unwrap();
    assert_eq!(pooled.weights, vec![1.0]);
    assert_eq!(pooled.context, h[0]);
}

#[test]
fn gradients_match_finite_differences() {
    for seed in 0..5 {
        for range in [INIT_RANGE, 0.5] {
            let (_, batch) = gradcheck_instance(Dims::new(3, 4), 5, 2, seed).unwrap();
            let params = ModelParams::init_with_range(Dims::new(3, 4), range, seed);
            let report = gradient_check(&params, &batch, 1e-5).unwrap();
            assert_eq!(report.checked, params.parameter_count());
            assert!(report.max_relative_error < 1e-4, "seed {seed} range {range}: {report:?}");
        }
    }
}

#[test]
fn loss_matches_forward_cross_entropy() {
    let (params, batch) = gradcheck_instance(Dims::new(3, 4), 4, 3, 2).unwrap();
    let expected: f64 = batch
        .iter()
        .map(|(seq, label)| -classify(&params, seq).unwrap().probabilities[label.index()].ln())
        .sum::<f64>()
        / batch.len() as f64;
    assert!((loss(&params, &batch).unwrap() - expected).abs() < 1e-12);
    let (l, _) = loss_and_gradients(&params, &batch).unwrap();
    assert!((l - expected).abs() < 1e-12);
}

#[test]
fn features_match_naive_dft() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let rate = 8000.0;
    let wave: Vec<f64> = (0..800).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let config = FeatureConfig { window_ms: 10.0, hop_ms: 5.0, bands: 5 };
    let seq = extract_features(&wave, rate, &config).unwrap();
    let n = 80;
    assert_eq!(seq.len(), (800 - n) / 40 + 1);
    for (f, frame) in seq.frames.iter().enumerate() {
        let mut energy = vec![0.0; 5];
        for k in 0..=n / 2 {
            let (mut re, mut im) = (0.0, 0.0);
            for t in 0..n {
                let ang = -2.0 * std::f64::consts::PI * (k * t) as f64 / n as f64;
                re += wave[f * 40 + t] * ang.cos();
                im += wave[f * 40 + t] * ang.sin();
            }
            let band = ((k as f64 / n as f64) * 2.0 * 5.0).floor().min(4.0) as usize;
            energy[band] += re * re + im * im;
        }
        for (a, e) in frame.iter().zip(energy) {
            assert!((a - e.ln_1p()).abs() < 1e-9);
        }
    }
}

#[test]
fn toy_set_is_nearest_centroid_separable() {
    let set = toy::separable_toy_set(200, 7).unwrap();
    let mean = |seq: &FrameSequence| -> Vec<f64> {
        let d = seq.dim().unwrap();
        let mut m = vec![0.0; d];
        for f in &seq.frames {
            for j in 0..d {
                m[j] += f[j] / seq.len() as f64;
            }
        }
        m
    };
    let mut centroids = vec![vec![0.0; toy::TOY_BANDS]; CLASS_COUNT];
    let mut counts = vec![0usize; CLASS_COUNT];
    for (seq, label) in &set {
        counts[label.index()] += 1;
        for (c, v) in centroids[label.index()].iter_mut().zip(mean(seq)) {
            *c += v;
        }
    }
    for (c, n) in centroids.iter_mut().zip(&counts) {
        c.iter_mut().for_each(|v| *v /= *n as f64);
    }
    for (seq, label) in &set {
        let m = mean(seq);
        let dist: Vec<f64> = centroids
            .iter()
            .map(|c| -c.iter().zip(&m).map(|(a, b)| (a - b).powi(2)).sum::<f64>())
            .collect();
        assert_eq!(argmax(&dist), label.index(), "{}", seq.utterance_id);
    }
}

#[test]
fn toy_training_is_deterministic() {
    let set = toy::separable_toy_set(42, 1).unwrap();
    let init = ModelParams::init(Dims::new(toy::TOY_BANDS, 8), 1);
    let cfg = TrainConfig { steps: 30, ..Default::default() };
    let a = train(&init, &set, &cfg, 3).unwrap();
    let b = train(&init, &set, &cfg, 3).unwrap();
    assert_eq!(a, b);
    let c = train(&init, &set, &cfg, 4).unwrap();
    assert_ne!(a, c);
}

#[test]
fn divergence_is_reported() {
    let set = toy::separable_toy_set(21, 1).unwrap();
    let init = ModelParams::init(Dims::new(toy::TOY_BANDS, 4), 1);
    let cfg = TrainConfig { learning_rate: 1e300, steps: 50, batch_size: 4 };
    assert!(matches!(train(&init, &set, &cfg, 0), Err(fitbot::Error::Diverged { .. })));
}

#[test]
fn shape_errors() {
    let params = ModelParams::init(Dims::new(3, 4), 0);
    let wrong = FrameSequence::new("x", 10.0, vec![vec![0.0; 2]]);
    assert!(classify(&params, &wrong).is_err());
    assert!(classify(&params, &FrameSequence::new("x", 10.0, vec![])).is_err());
    assert!(EmotionLabel::new(CLASS_COUNT).is_err());
}

proptest! {
    #[test]
    fn logit_shift_keeps_scores(seed in 0u64..1000, shift in -50.0..50.0f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut params = ModelParams::init_with_range(Dims::new(3, 4), 0.5, seed);
        let seq = random_sequence(&mut rng, 4, 3);
        let before = classify(&params, &seq).unwrap();
        params.output_bias.iter_mut().for_each(|b| *b += shift);
        let after = classify(&params, &seq).unwrap();
        prop_assert_eq!(before.argmax, after.argmax);
        for (a, b) in before.probabilities.iter().zip(&after.probabilities) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn scores_are_distributions(seed in 0u64..1000, t in 1usize..12) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let params = ModelParams::init_with_range(Dims::new(5, 6), 1.0, seed);
        let score = classify(&params, &random_sequence(&mut rng, t, 5)).unwrap();
        let sum: f64 = score.probabilities.iter().sum();
        prop_assert!((sum - 1.0).abs() < 1e-12);
        prop_assert!(score.probabilities.iter().all(|&p| (0.0..=1.0).contains(&p)));
    }
}
