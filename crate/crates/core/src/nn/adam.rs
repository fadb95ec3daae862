//! Adam with bias correction, moments shaped like the parameters they track.

use crate::error::{Error, Result};
use crate::nn::{GradientBundle, MlpParameters};

pub const ADAM_BETA1: f64 = 0.9;
pub const ADAM_BETA2: f64 = 0.999;
pub const ADAM_EPSILON: f64 = 1e-8;

/// First/second moment estimates plus the step counter.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub(crate) first: GradientBundle,
    pub(crate) second: GradientBundle,
    pub(crate) step_count: u64,
}

impl AdamState {
    pub fn new(params: &MlpParameters) -> Self {
        AdamState {
            first: GradientBundle::zeros_like(params),
            second: GradientBundle::zeros_like(params),
            step_count: 0,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step_count
    }
}

/// One Adam update in place. The learning rate is passed per call so actor and
/// critic can share the implementation with different rates.
pub fn adam_step(
    params: &mut MlpParameters,
    grads: &GradientBundle,
    state: &mut AdamState,
    lr: f64,
) -> Result<()> {
    // Zero is allowed: it advances the moment estimates without moving the
    // parameters, which isolates other update mechanisms in experiments.
    if !(lr.is_finite() && lr >= 0.0) {
        return Err(Error::Config(format!(
            "learning rate must be finite and non-negative, got {lr}"
        )));
    }
    if !grads.matches(params) {
        return Err(Error::Shape("gradients do not match parameter shape".into()));
    }
    if !grads.all_finite() {
        return Err(Error::Numerical(
            "non-finite gradient passed to adam".into(),
        ));
    }

    state.step_count += 1;
    let t = state.step_count as i32;
    let bias1 = 1.0 - ADAM_BETA1.powi(t);
    let bias2 = 1.0 - ADAM_BETA2.powi(t);

    let update = |p: &mut [f64], g: &[f64], m: &mut [f64], v: &mut [f64]| {
        for i in 0..p.len() {
            m[i] = ADAM_BETA1 * m[i] + (1.0 - ADAM_BETA1) * g[i];
            v[i] = ADAM_BETA2 * v[i] + (1.0 - ADAM_BETA2) * g[i] * g[i];
            let m_hat = m[i] / bias1;
            let v_hat = v[i] / bias2;
            p[i] -= lr * m_hat / (v_hat.sqrt() + ADAM_EPSILON);
        }
    };

    for layer in 0..params.weights.len() {
        update(
            &mut params.weights[layer],
            &grads.weights[layer],
            &mut state.first.weights[layer],
            &mut state.second.weights[layer],
        );
        update(
            &mut params.biases[layer],
            &grads.biases[layer],
            &mut state.first.biases[layer],
            &mut state.second.biases[layer],
        );
    }
    Ok(())
}
