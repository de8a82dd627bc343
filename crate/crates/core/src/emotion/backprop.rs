use super::matrix::dot;
use super::model::{check_input, output_probabilities, pool, unroll, ModelParams};
use super::{EmotionLabel, FrameSequence};
use crate::{Error, Result};

fn check_batch(params: &ModelParams, batch: &[(FrameSequence, EmotionLabel)]) -> Result<()> {
    if batch.is_empty() {
        return Err(Error::invalid("batch must not be empty"));
    }
    for (seq, label) in batch {
        check_input(params, seq)?;
        if seq.is_empty() {
            return Err(Error::invalid(format!("sequence {} is empty", seq.utterance_id)));
        }
        if label.index() >= params.dims.class_count {
            return Err(Error::invalid(format!("label {} out of range", label.index())));
        }
    }
    Ok(())
}

/// Mean cross-entropy of the batch, without gradients.
pub fn loss(params: &ModelParams, batch: &[(FrameSequence, EmotionLabel)]) -> Result<f64> {
    check_batch(params, batch)?;
    let total: f64 = batch
        .iter()
        .map(|(seq, label)| {
            let hidden: Vec<Vec<f64>> = unroll(params, seq).into_iter().map(|s| s.h).collect();
            let pooled = pool(params, &hidden);
            -output_probabilities(params, &pooled.context)[label.index()].ln()
        })
        .sum();
    Ok(total / batch.len() as f64)
}

/// Mean cross-entropy and its gradient with respect to every parameter,
/// by backpropagation through the output layer, the attention pooling and
/// the unrolled recurrence.
pub fn loss_and_gradients(
    params: &ModelParams,
    batch: &[(FrameSequence, EmotionLabel)],
) -> Result<(f64, ModelParams)> {
    check_batch(params, batch)?;
    let scale = 1.0 / batch.len() as f64;
    let h_dim = params.dims.hidden_dim;
    let mut grads = ModelParams::zeros(params.dims);
    let mut total = 0.0;

    for (seq, label) in batch {
        let steps = unroll(params, seq);
        let hidden: Vec<Vec<f64>> = steps.iter().map(|s| s.h.clone()).collect();
        let pooled = pool(params, &hidden);
        let probs = output_probabilities(params, &pooled.context);
        total -= probs[label.index()].ln();

        // softmax + cross-entropy
        let mut d_logits: Vec<f64> = probs.iter().map(|p| p * scale).collect();
        d_logits[label.index()] -= scale;
        grads.output_weights.add_outer(&d_logits, &pooled.context);
        add_assign(&mut grads.output_bias, &d_logits);
        let mut d_context = vec![0.0; h_dim];
        params.output_weights.tr_mul_vec_acc(&d_logits, &mut d_context);

        // attention pooling
        let d_weights: Vec<f64> = hidden.iter().map(|h| dot(&d_context, h)).collect();
        let mean = dot(&pooled.weights, &d_weights);
        let mut d_hidden: Vec<Vec<f64>> = Vec::with_capacity(hidden.len());
        for (t, h) in hidden.iter().enumerate() {
            let alpha = pooled.weights[t];
            let d_score = alpha * (d_weights[t] - mean);
            let u = &pooled.projected[t];
            for (g, ui) in grads.attention_score.iter_mut().zip(u) {
                *g += d_score * ui;
            }
            let d_pre: Vec<f64> = u
                .iter()
                .zip(&params.attention_score)
                .map(|(ui, vi)| d_score * vi * (1.0 - ui * ui))
                .collect();
            grads.attention_projection.add_outer(&d_pre, h);
            add_assign(&mut grads.attention_bias, &d_pre);
            let mut dh: Vec<f64> = d_context.iter().map(|c| alpha * c).collect();
            params.attention_projection.tr_mul_vec_acc(&d_pre, &mut dh);
            d_hidden.push(dh);
        }

        // recurrence, last step first
        let mut carry = vec![0.0; h_dim];
        for (t, step) in steps.iter().enumerate().rev() {
            let x = &seq.frames[t];
            let dh: Vec<f64> = d_hidden[t].iter().zip(&carry).map(|(a, b)| a + b).collect();
            let mut d_update_pre = vec![0.0; h_dim];
            let mut d_candidate_pre = vec![0.0; h_dim];
            let mut d_prev = vec![0.0; h_dim];
            for i in 0..h_dim {
                let z = step.update[i];
                let c = step.candidate[i];
                d_update_pre[i] = dh[i] * (c - step.h_prev[i]) * z * (1.0 - z);
                d_candidate_pre[i] = dh[i] * z * (1.0 - c * c);
                d_prev[i] = dh[i] * (1.0 - z);
            }
            grads.update_input.add_outer(&d_update_pre, x);
            grads.update_hidden.add_outer(&d_update_pre, &step.h_prev);
            add_assign(&mut grads.update_bias, &d_update_pre);
            grads.candidate_input.add_outer(&d_candidate_pre, x);
            grads.candidate_hidden.add_outer(&d_candidate_pre, &step.h_prev);
            add_assign(&mut grads.candidate_bias, &d_candidate_pre);
            params.update_hidden.tr_mul_vec_acc(&d_update_pre, &mut d_prev);
            params.candidate_hidden.tr_mul_vec_acc(&d_candidate_pre, &mut d_prev);
            carry = d_prev;
        }
    }
    Ok((total * scale, grads))
}

fn add_assign(dst: &mut [f64], src: &[f64]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d += s;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::emotion::Dims;

    fn batch() -> Vec<(FrameSequence, EmotionLabel)> {
        vec![
            (
                FrameSequence::new("a", 10.0, vec![vec![0.5, -1.0, 0.2], vec![0.1, 0.0, 0.9]]),
                EmotionLabel::new(3).unwrap(),
            ),
            (
                FrameSequence::new("b", 10.0, vec![vec![-0.3, 0.4, 0.0]]),
                EmotionLabel::new(20).unwrap(),
            ),
        ]
    }

    #[test]
    fn zero_params_loss_is_ln_21() {
        let params = ModelParams::zeros(Dims::new(3, 4));
        let (l, _) = loss_and_gradients(&params, &batch()).unwrap();
        assert!((l - 21f64.ln()).abs() < 1e-12);
        assert!((l - 3.0445).abs() < 1e-4);
    }

    #[test]
    fn loss_agrees_with_gradient_pass() {
        let params = ModelParams::init(Dims::new(3, 4), 5);
        let (l, _) = loss_and_gradients(&params, &batch()).unwrap();
        assert_eq!(l, loss(&params, &batch()).unwrap());
    }

    #[test]
    fn gradient_has_parameter_shape() {
        let params = ModelParams::init(Dims::new(3, 4), 5);
        let (_, g) = loss_and_gradients(&params, &batch()).unwrap();
        g.validate().unwrap();
        assert_eq!(g.dims, params.dims);
        assert_eq!(g.parameter_count(), params.parameter_count());
    }

    #[test]
    fn duplicated_batch_is_equivalent() {
        let params = ModelParams::init(Dims::new(3, 4), 5);
        let b = batch();
        let doubled: Vec<_> = b.iter().chain(b.iter()).cloned().collect();
        let (l1, g1) = loss_and_gradients(&params, &b).unwrap();
        let (l2, g2) = loss_and_gradients(&params, &doubled).unwrap();
        assert!((l1 - l2).abs() < 1e-14);
        for ((_, a), (_, b)) in g1.tensors().into_iter().zip(g2.tensors()) {
            for (x, y) in a.iter().zip(b) {
                assert!((x - y).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn empty_batch_rejected() {
        let params = ModelParams::zeros(Dims::new(3, 4));
        assert!(loss_and_gradients(&params, &[]).is_err());
    }
}
