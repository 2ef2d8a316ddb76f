use ndarray::Zip;
use serde::{Deserialize, Serialize};

use super::mlp::{Grad, Mlp};
use crate::error::{Error, Result};

/// Adam optimizer state for one network.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AdamState {
    pub step_count: u64,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    first_moment: Grad,
    second_moment: Grad,
}

impl AdamState {
    /// Fresh state with zero moments and the usual defaults
    /// (β1 = 0.9, β2 = 0.999, ε = 1e-8).
    pub fn new(model: &Mlp, learning_rate: f64) -> Self {
        AdamState {
            step_count: 0,
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            first_moment: Grad::zeros_like(model),
            second_moment: Grad::zeros_like(model),
        }
    }
}

/// Bias-corrected update over one contiguous parameter block.
#[inline]
fn update_block(
    params: &mut [f64],
    m: &mut [f64],
    v: &mut [f64],
    g: &[f64],
    b1: f64,
    b2: f64,
    inv_bias1: f64,
    inv_bias2: f64,
    lr: f64,
    eps: f64,
) {
    for i in 0..params.len() {
        let gi = g[i];
        let mi = b1 * m[i] + (1.0 - b1) * gi;
        let vi = b2 * v[i] + (1.0 - b2) * gi * gi;
        m[i] = mi;
        v[i] = vi;
        let m_hat = mi * inv_bias1;
        let v_hat = vi * inv_bias2;
        params[i] -= lr * m_hat / (v_hat.sqrt() + eps);
    }
}

/// One Adam update with bias correction. Rejects non-finite gradients, which
/// signal a diverged loss.
pub fn adam_step(params: &mut Mlp, grad: &Grad, state: &mut AdamState) -> Result<()> {
    if !grad.is_finite() {
        return Err(Error::NonFinite("gradient passed to adam_step".into()));
    }
    state.step_count += 1;
    let t = state.step_count as i32;
    let (b1, b2) = (state.beta1, state.beta2);
    let inv_bias1 = 1.0 / (1.0 - b1.powi(t));
    let inv_bias2 = 1.0 / (1.0 - b2.powi(t));
    let lr = state.learning_rate;
    let eps = state.epsilon;

    for i in 0..params.weights.len() {
        match (
            params.weights[i].as_slice_mut(),
            state.first_moment.weights[i].as_slice_mut(),
            state.second_moment.weights[i].as_slice_mut(),
            grad.weights[i].as_slice(),
        ) {
            (Some(p), Some(m), Some(v), Some(g)) => {
                update_block(p, m, v, g, b1, b2, inv_bias1, inv_bias2, lr, eps);
            }
            _ => {
                // Non-contiguous layout (e.g. hand-built views): elementwise.
                Zip::from(&mut params.weights[i])
                    .and(&mut state.first_moment.weights[i])
                    .and(&mut state.second_moment.weights[i])
                    .and(&grad.weights[i])
                    .for_each(|p, m, v, &g| {
                        *m = b1 * *m + (1.0 - b1) * g;
                        *v = b2 * *v + (1.0 - b2) * g * g;
                        *p -= lr * (*m * inv_bias1) / ((*v * inv_bias2).sqrt() + eps);
                    });
            }
        }
        update_block(
            params.biases[i].as_slice_mut().unwrap(),
            state.first_moment.biases[i].as_slice_mut().unwrap(),
            state.second_moment.biases[i].as_slice_mut().unwrap(),
            grad.biases[i].as_slice().unwrap(),
            b1,
            b2,
            inv_bias1,
            inv_bias2,
            lr,
            eps,
        );
    }
    Ok(())
}
