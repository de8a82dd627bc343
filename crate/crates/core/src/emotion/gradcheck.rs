use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::backprop::{loss, loss_and_gradients};
use super::{Dims, EmotionLabel, FrameSequence, ModelParams, CLASS_COUNT};
use crate::Result;

/// Denominator floor for relative errors. A central difference with
/// `eps = 1e-5` resolves a loss of order 1 to roughly 1e-11, so gradients
/// far below this floor are compared on an absolute scale instead.
pub const RELATIVE_FLOOR: f64 = 1e-6;

/// `|a - b| / max(|a|, |b|, RELATIVE_FLOOR)`
pub fn relative_error(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(RELATIVE_FLOOR)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradCheckReport {
    pub checked: usize,
    pub max_relative_error: f64,
    pub worst_tensor: String,
    pub worst_index: usize,
    pub analytic: f64,
    pub numeric: f64,
}

/// Compares every backprop gradient entry with a central finite difference
/// of the loss, `(L(w + eps) - L(w - eps)) / (2 eps)`.
pub fn gradient_check(
    params: &ModelParams,
    batch: &[(FrameSequence, EmotionLabel)],
    epsilon: f64,
) -> Result<GradCheckReport> {
    let (_, grads) = loss_and_gradients(params, batch)?;
    let mut probe = params.clone();
    let mut report = GradCheckReport {
        checked: 0,
        max_relative_error: 0.0,
        worst_tensor: String::new(),
        worst_index: 0,
        analytic: 0.0,
        numeric: 0.0,
    };
    for (tensor, (name, analytic)) in grads.tensors().into_iter().enumerate() {
        for (index, &a) in analytic.iter().enumerate() {
            let original = probe.tensors()[tensor].1[index];
            probe.tensors_mut()[tensor].1[index] = original + epsilon;
            let plus = loss(&probe, batch)?;
            probe.tensors_mut()[tensor].1[index] = original - epsilon;
            let minus = loss(&probe, batch)?;
            probe.tensors_mut()[tensor].1[index] = original;

            let numeric = (plus - minus) / (2.0 * epsilon);
            let err = relative_error(a, numeric);
            report.checked += 1;
            if err > report.max_relative_error || report.worst_tensor.is_empty() {
                report.max_relative_error = err;
                report.worst_tensor = name.to_string();
                report.worst_index = index;
                report.analytic = a;
                report.numeric = numeric;
            }
        }
    }
    Ok(report)
}

/// A seeded random problem for gradient checking: initial weights plus
/// `batch` sequences of `frames` frames with entries in `[-1, 1)` and
/// random labels.
pub fn gradcheck_instance(
    dims: Dims,
    frames: usize,
    batch: usize,
    seed: u64,
) -> Result<(ModelParams, Vec<(FrameSequence, EmotionLabel)>)> {
    let params = ModelParams::init(dims, seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
    let batch = (0..batch)
        .map(|b| {
            let frames = (0..frames)
                .map(|_| (0..dims.input_dim).map(|_| rng.gen_range(-1.0..1.0)).collect())
                .collect();
            let label = EmotionLabel::new(rng.gen_range(0..CLASS_COUNT))?;
            Ok((FrameSequence::new(format!("check_{b}"), 10.0, frames), label))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((params, batch))
}
