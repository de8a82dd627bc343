use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::matrix::{dot, Matrix};
use super::{EmotionLabel, EmotionScore, FrameSequence, CLASS_COUNT};
use crate::{Error, Result};

/// Half-width of the uniform initialization interval.
pub const INIT_RANGE: f64 = 0.08;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dims {
    pub input_dim: usize,
    pub hidden_dim: usize,
    pub class_count: usize,
}

impl Dims {
    pub fn new(input_dim: usize, hidden_dim: usize) -> Self {
        Self { input_dim, hidden_dim, class_count: CLASS_COUNT }
    }
}

/// Weights of the gated recurrent cell, the attention pooling layer and the
/// output layer. Gradients share this type.
///
/// Cell, with `h_0 = 0`:
///
/// ```text
/// z_t = sigmoid(W_z x_t + U_z h_{t-1} + b_z)
/// c_t = tanh(W_c x_t + U_c h_{t-1} + b_c)
/// h_t = (1 - z_t) * h_{t-1} + z_t * c_t
/// ```
///
/// Pooling scores `e_t = v · tanh(W_a h_t + b_a)`, then
/// `context = Σ softmax(e)_t h_t` and `logits = W_o context + b_o`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub dims: Dims,
    pub update_input: Matrix,
    pub update_hidden: Matrix,
    pub update_bias: Vec<f64>,
    pub candidate_input: Matrix,
    pub candidate_hidden: Matrix,
    pub candidate_bias: Vec<f64>,
    pub attention_projection: Matrix,
    pub attention_bias: Vec<f64>,
    pub attention_score: Vec<f64>,
    pub output_weights: Matrix,
    pub output_bias: Vec<f64>,
}

impl ModelParams {
    pub fn zeros(dims: Dims) -> Self {
        let Dims { input_dim: d, hidden_dim: h, class_count: k } = dims;
        Self {
            dims,
            update_input: Matrix::zeros(h, d),
            update_hidden: Matrix::zeros(h, h),
            update_bias: vec![0.0; h],
            candidate_input: Matrix::zeros(h, d),
            candidate_hidden: Matrix::zeros(h, h),
            candidate_bias: vec![0.0; h],
            attention_projection: Matrix::zeros(h, h),
            attention_bias: vec![0.0; h],
            attention_score: vec![0.0; h],
            output_weights: Matrix::zeros(k, h),
            output_bias: vec![0.0; k],
        }
    }

    /// Every entry drawn uniformly from `[-INIT_RANGE, INIT_RANGE)`.
    pub fn init(dims: Dims, seed: u64) -> Self {
        Self::init_with_range(dims, INIT_RANGE, seed)
    }

    pub fn init_with_range(dims: Dims, range: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut params = Self::zeros(dims);
        for (_, tensor) in params.tensors_mut() {
            for w in tensor {
                *w = rng.gen_range(-range..range);
            }
        }
        params
    }

    /// Named views over every parameter tensor, in a fixed order.
    pub fn tensors(&self) -> [(&'static str, &[f64]); 11] {
        [
            ("update_input", self.update_input.as_slice()),
            ("update_hidden", self.update_hidden.as_slice()),
            ("update_bias", &self.update_bias),
            ("candidate_input", self.candidate_input.as_slice()),
            ("candidate_hidden", self.candidate_hidden.as_slice()),
            ("candidate_bias", &self.candidate_bias),
            ("attention_projection", self.attention_projection.as_slice()),
            ("attention_bias", &self.attention_bias),
            ("attention_score", &self.attention_score),
            ("output_weights", self.output_weights.as_slice()),
            ("output_bias", &self.output_bias),
        ]
    }

    pub fn tensors_mut(&mut self) -> [(&'static str, &mut [f64]); 11] {
        [
            ("update_input", self.update_input.as_mut_slice()),
            ("update_hidden", self.update_hidden.as_mut_slice()),
            ("update_bias", &mut self.update_bias),
            ("candidate_input", self.candidate_input.as_mut_slice()),
            ("candidate_hidden", self.candidate_hidden.as_mut_slice()),
            ("candidate_bias", &mut self.candidate_bias),
            ("attention_projection", self.attention_projection.as_mut_slice()),
            ("attention_bias", &mut self.attention_bias),
            ("attention_score", &mut self.attention_score),
            ("output_weights", self.output_weights.as_mut_slice()),
            ("output_bias", &mut self.output_bias),
        ]
    }

    pub fn parameter_count(&self) -> usize {
        self.tensors().iter().map(|(_, t)| t.len()).sum()
    }

    /// `self += scale * other`, tensor by tensor.
    pub fn add_scaled(&mut self, other: &ModelParams, scale: f64) {
        for ((_, dst), (_, src)) in self.tensors_mut().into_iter().zip(other.tensors()) {
            for (d, s) in dst.iter_mut().zip(src) {
                *d += scale * s;
            }
        }
    }

    /// Shape errors are invalid arguments; non-finite entries are invalid state.
    pub fn validate(&self) -> Result<()> {
        let Dims { input_dim: d, hidden_dim: h, class_count: k } = self.dims;
        if d == 0 || h == 0 {
            return Err(Error::invalid("input and hidden dimensions must be positive"));
        }
        if k != CLASS_COUNT {
            return Err(Error::invalid(format!("class count must be {CLASS_COUNT}, got {k}")));
        }
        let matrices = [
            ("update_input", &self.update_input, h, d),
            ("update_hidden", &self.update_hidden, h, h),
            ("candidate_input", &self.candidate_input, h, d),
            ("candidate_hidden", &self.candidate_hidden, h, h),
            ("attention_projection", &self.attention_projection, h, h),
            ("output_weights", &self.output_weights, k, h),
        ];
        for (name, m, rows, cols) in matrices {
            if m.rows() != rows || m.cols() != cols {
                return Err(Error::invalid(format!(
                    "{name} is {}x{}, expected {rows}x{cols}",
                    m.rows(),
                    m.cols()
                )));
            }
        }
        let vectors = [
            ("update_bias", &self.update_bias, h),
            ("candidate_bias", &self.candidate_bias, h),
            ("attention_bias", &self.attention_bias, h),
            ("attention_score", &self.attention_score, h),
            ("output_bias", &self.output_bias, k),
        ];
        for (name, v, len) in vectors {
            if v.len() != len {
                return Err(Error::invalid(format!("{name} has length {}, expected {len}", v.len())));
            }
        }
        for (name, tensor) in self.tensors() {
            if tensor.iter().any(|w| !w.is_finite()) {
                return Err(Error::InvalidState(format!("{name} has a non-finite entry")));
            }
        }
        Ok(())
    }
}

/// One unrolled step of the cell, kept for backpropagation.
pub(crate) struct Step {
    pub h_prev: Vec<f64>,
    pub update: Vec<f64>,
    pub candidate: Vec<f64>,
    pub h: Vec<f64>,
}

pub(crate) fn check_input(params: &ModelParams, seq: &FrameSequence) -> Result<()> {
    params.validate()?;
    seq.validate()?;
    if let Some(dim) = seq.dim() {
        if dim != params.dims.input_dim {
            return Err(Error::invalid(format!(
                "frame dimension {dim} does not match model input dimension {}",
                params.dims.input_dim
            )));
        }
    }
    Ok(())
}

pub(crate) fn unroll(params: &ModelParams, seq: &FrameSequence) -> Vec<Step> {
    let h_dim = params.dims.hidden_dim;
    let mut h_prev = vec![0.0; h_dim];
    let mut steps = Vec::with_capacity(seq.len());
    for x in &seq.frames {
        let mut update = params.update_bias.clone();
        params.update_input.mul_vec_acc(x, &mut update);
        params.update_hidden.mul_vec_acc(&h_prev, &mut update);
        update.iter_mut().for_each(|a| *a = sigmoid(*a));

        let mut candidate = params.candidate_bias.clone();
        params.candidate_input.mul_vec_acc(x, &mut candidate);
        params.candidate_hidden.mul_vec_acc(&h_prev, &mut candidate);
        candidate.iter_mut().for_each(|a| *a = a.tanh());

        let h: Vec<f64> = (0..h_dim)
            .map(|i| (1.0 - update[i]) * h_prev[i] + update[i] * candidate[i])
            .collect();
        steps.push(Step { h_prev, update, candidate, h: h.clone() });
        h_prev = h;
    }
    steps
}

fn sigmoid(a: f64) -> f64 {
    1.0 / (1.0 + (-a).exp())
}

/// Hidden states `h_1..h_T` of the recurrent cell.
pub fn rnn_forward(params: &ModelParams, seq: &FrameSequence) -> Result<Vec<Vec<f64>>> {
    check_input(params, seq)?;
    Ok(unroll(params, seq).into_iter().map(|s| s.h).collect())
}

/// Attention-pooled summary of a hidden-state sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct Pooled {
    pub context: Vec<f64>,
    pub weights: Vec<f64>,
    /// `tanh(W_a h_t + b_a)` per step.
    pub(crate) projected: Vec<Vec<f64>>,
}

pub fn attention_pool(params: &ModelParams, hidden: &[Vec<f64>]) -> Result<Pooled> {
    if hidden.is_empty() {
        return Err(Error::invalid("attention pooling needs at least one hidden state"));
    }
    let h_dim = params.dims.hidden_dim;
    if let Some(bad) = hidden.iter().position(|h| h.len() != h_dim) {
        return Err(Error::invalid(format!("hidden state {bad} does not have dimension {h_dim}")));
    }
    Ok(pool(params, hidden))
}

pub(crate) fn pool(params: &ModelParams, hidden: &[Vec<f64>]) -> Pooled {
    let projected: Vec<Vec<f64>> = hidden
        .iter()
        .map(|h| {
            let mut a = params.attention_bias.clone();
            params.attention_projection.mul_vec_acc(h, &mut a);
            a.iter_mut().for_each(|v| *v = v.tanh());
            a
        })
        .collect();
    let scores: Vec<f64> = projected.iter().map(|u| dot(&params.attention_score, u)).collect();
    let weights = softmax(&scores);
    let mut context = vec![0.0; params.dims.hidden_dim];
    for (alpha, h) in weights.iter().zip(hidden) {
        for (c, v) in context.iter_mut().zip(h) {
            *c += alpha * v;
        }
    }
    Pooled { context, weights, projected }
}

/// Numerically stable softmax.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

pub(crate) fn output_probabilities(params: &ModelParams, context: &[f64]) -> Vec<f64> {
    let mut logits = params.output_bias.clone();
    params.output_weights.mul_vec_acc(context, &mut logits);
    softmax(&logits)
}

pub fn classify(params: &ModelParams, seq: &FrameSequence) -> Result<EmotionScore> {
    check_input(params, seq)?;
    if seq.is_empty() {
        return Err(Error::invalid("cannot classify an empty sequence"));
    }
    let hidden: Vec<Vec<f64>> = unroll(params, seq).into_iter().map(|s| s.h).collect();
    let pooled = pool(params, &hidden);
    let probabilities = output_probabilities(params, &pooled.context);
    let argmax = EmotionLabel::new(super::argmax(&probabilities))?;
    Ok(EmotionScore { probabilities, argmax })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(frames: Vec<Vec<f64>>) -> FrameSequence {
        FrameSequence::new("t", 10.0, frames)
    }

    #[test]
    fn zero_cell_stays_at_zero() {
        let params = ModelParams::zeros(Dims::new(3, 4));
        let hidden = rnn_forward(&params, &seq(vec![vec![1.0, -2.0, 3.0]; 6])).unwrap();
        assert_eq!(hidden.len(), 6);
        assert!(hidden.iter().flatten().all(|&v| v == 0.0));
    }

    #[test]
    #[allow(clippy::needless_range_loop)]
    fn single_step() {
        let params = ModelParams::init_with_range(Dims::new(2, 3), 0.5, 9);
        let x = vec![0.3, -0.7];
        let hidden = rnn_forward(&params, &seq(vec![x.clone()])).unwrap();
        for i in 0..3 {
            let z = sigmoid(dot(params.update_input.row(i), &x) + params.update_bias[i]);
            let c = (dot(params.candidate_input.row(i), &x) + params.candidate_bias[i]).tanh();
            assert!((hidden[0][i] - z * c).abs() < 1e-15);
        }
    }

    #[test]
    fn hidden_states_bounded() {
        let params = ModelParams::init_with_range(Dims::new(2, 5), 3.0, 1);
        let hidden = rnn_forward(&params, &seq(vec![vec![10.0, -10.0]; 20])).unwrap();
        assert!(hidden.iter().flatten().all(|v| *v > -1.0 && *v <= 1.0));
    }

    #[test]
    fn singleton_attention() {
        let params = ModelParams::init(Dims::new(2, 3), 4);
        let h = vec![vec![0.1, -0.2, 0.3]];
        let pooled = attention_pool(&params, &h).unwrap();
        assert_eq!(pooled.weights, vec![1.0]);
        assert_eq!(pooled.context, h[0]);
    }

    #[test]
    fn identical_states_get_equal_weight() {
        let params = ModelParams::init(Dims::new(2, 3), 4);
        let h = vec![vec![0.1, -0.2, 0.3]; 4];
        let pooled = attention_pool(&params, &h).unwrap();
        for w in &pooled.weights {
            assert!((w - 0.25).abs() < 1e-15);
        }
        for (c, v) in pooled.context.iter().zip(&h[0]) {
            assert!((c - v).abs() < 1e-15);
        }
    }

    #[test]
    fn attention_errors() {
        let params = ModelParams::init(Dims::new(2, 3), 4);
        assert!(attention_pool(&params, &[]).is_err());
        assert!(attention_pool(&params, &[vec![0.0; 2]]).is_err());
    }

    #[test]
    fn zero_params_are_uniform() {
        let params = ModelParams::zeros(Dims::new(3, 4));
        let score = classify(&params, &seq(vec![vec![1.0, 2.0, 3.0]; 2])).unwrap();
        for p in &score.probabilities {
            assert!((p - 1.0 / 21.0).abs() < 1e-15);
        }
        assert_eq!(score.argmax.index(), 0);
    }

    #[test]
    fn input_errors() {
        let params = ModelParams::init(Dims::new(3, 4), 0);
        assert!(matches!(
            classify(&params, &seq(vec![vec![1.0, 2.0]])),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(classify(&params, &seq(vec![])), Err(Error::InvalidArgument(_))));
        let mut broken = params.clone();
        broken.candidate_hidden.as_mut_slice()[2] = f64::NAN;
        assert!(matches!(
            rnn_forward(&broken, &seq(vec![vec![1.0, 2.0, 3.0]])),
            Err(Error::InvalidState(_))
        ));
        let mut misshapen = params;
        misshapen.output_bias.pop();
        assert!(matches!(misshapen.validate(), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn params_json_round_trip() {
        let params = ModelParams::init(Dims::new(3, 4), 11);
        let text = serde_json::to_string(&params).unwrap();
        let value: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(value["dims"]["hidden_dim"], 4);
        assert_eq!(value["update_input"].as_array().unwrap().len(), 4);
        assert_eq!(serde_json::from_str::<ModelParams>(&text).unwrap(), params);
    }
}
