//! Squashed diagonal Gaussian: the action distribution produced by the policy
//! head. Pre-squash values are Gaussian per dimension; actions are their tanh,
//! so every action lands strictly inside (-1, 1)^d and the harness maps that
//! cube onto each environment's native bounds.

use rand::Rng;

use crate::error::{Error, Result};

pub const LOG_STD_MIN: f64 = -20.0;
pub const LOG_STD_MAX: f64 = 2.0;
/// Floor inside the tanh-volume correction, keeps log_prob finite at saturation.
pub const SQUASH_EPSILON: f64 = 1e-6;
/// tanh(18) still rounds below 1.0 in f64; tanh(19) does not. Clamping the
/// pre-squash value here keeps actions strictly interior for any mean.
const PRE_SQUASH_LIMIT: f64 = 18.0;

const LN_2PI: f64 = 1.837_877_066_409_345_6;

#[derive(Debug, Clone, PartialEq)]
pub struct SquashedGaussian {
    mean: Vec<f64>,
    log_std: Vec<f64>,
}

/// One reparameterized draw together with the per-dimension partials needed to
/// push loss gradients back into the policy head.
#[derive(Debug, Clone)]
pub struct Sample {
    pub action: Vec<f64>,
    pub log_prob: f64,
    pub daction_dmean: Vec<f64>,
    pub daction_dlogstd: Vec<f64>,
    pub dlogp_dmean: Vec<f64>,
    pub dlogp_dlogstd: Vec<f64>,
}

impl SquashedGaussian {
    /// log_std is clamped into [LOG_STD_MIN, LOG_STD_MAX]; non-finite means or
    /// NaN log_stds are rejected rather than silently squashed.
    pub fn new(mean: Vec<f64>, log_std: Vec<f64>) -> Result<Self> {
        if mean.len() != log_std.len() {
            return Err(Error::Shape(format!(
                "mean has {} dims, log_std has {}",
                mean.len(),
                log_std.len()
            )));
        }
        if mean.iter().any(|m| !m.is_finite()) {
            return Err(Error::Input("non-finite mean in policy head".into()));
        }
        if log_std.iter().any(|l| l.is_nan()) {
            return Err(Error::Input("NaN log_std in policy head".into()));
        }
        let log_std = log_std
            .into_iter()
            .map(|l| l.clamp(LOG_STD_MIN, LOG_STD_MAX))
            .collect();
        Ok(SquashedGaussian { mean, log_std })
    }

    /// Splits a policy-net output of length 2d into mean and log_std halves.
    pub fn from_head_output(head: &[f64]) -> Result<Self> {
        if head.len() % 2 != 0 {
            return Err(Error::Shape(format!(
                "policy head output length {} is not even",
                head.len()
            )));
        }
        let d = head.len() / 2;
        Self::new(head[..d].to_vec(), head[d..].to_vec())
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn log_std(&self) -> &[f64] {
        &self.log_std
    }

    /// Reparameterized sample: action_i = tanh(mean_i + exp(log_std_i) * noise_i),
    /// log_prob = sum_i [gaussian log-density - ln(1 - tanh^2 + eps)].
    /// The partials treat the noise as fixed, which is exactly what the policy
    /// loss needs.
    pub fn sample(&self, noise: &[f64]) -> Result<Sample> {
        if noise.len() != self.dim() {
            return Err(Error::Shape(format!(
                "noise has {} dims, distribution has {}",
                noise.len(),
                self.dim()
            )));
        }
        if noise.iter().any(|n| !n.is_finite()) {
            return Err(Error::Input("non-finite noise".into()));
        }

        let d = self.dim();
        let mut action = Vec::with_capacity(d);
        let mut da_dm = Vec::with_capacity(d);
        let mut da_dl = Vec::with_capacity(d);
        let mut dl_dm = Vec::with_capacity(d);
        let mut dl_dl = Vec::with_capacity(d);
        let mut log_prob = 0.0;

        for i in 0..d {
            let sigma = self.log_std[i].exp();
            let u_raw = self.mean[i] + sigma * noise[i];
            let u = u_raw.clamp(-PRE_SQUASH_LIMIT, PRE_SQUASH_LIMIT);
            // Past the clamp the action no longer moves with the parameters.
            let gate = if u_raw.abs() < PRE_SQUASH_LIMIT { 1.0 } else { 0.0 };
            let t = u.tanh();
            let one_m_t2 = 1.0 - t * t;

            log_prob += -0.5 * LN_2PI
                - self.log_std[i]
                - 0.5 * noise[i] * noise[i]
                - (one_m_t2 + SQUASH_EPSILON).ln();

            let corr = 2.0 * t * one_m_t2 / (one_m_t2 + SQUASH_EPSILON);
            action.push(t);
            da_dm.push(gate * one_m_t2);
            da_dl.push(gate * one_m_t2 * sigma * noise[i]);
            dl_dm.push(gate * corr);
            dl_dl.push(-1.0 + gate * corr * sigma * noise[i]);
        }

        Ok(Sample {
            action,
            log_prob,
            daction_dmean: da_dm,
            daction_dlogstd: da_dl,
            dlogp_dmean: dl_dm,
            dlogp_dlogstd: dl_dl,
        })
    }

    /// Exploitation action: tanh of the mean, noise suppressed.
    pub fn deterministic_action(&self) -> Vec<f64> {
        self.mean
            .iter()
            .map(|m| m.clamp(-PRE_SQUASH_LIMIT, PRE_SQUASH_LIMIT).tanh())
            .collect()
    }
}

/// `n` independent standard-normal draws via Box-Muller. Self-contained so the
/// exact draw sequence is pinned by this crate, not by a distribution library.
pub fn standard_normal_vec<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    (0..n)
        .map(|_| {
            let u1: f64 = 1.0 - rng.gen::<f64>(); // (0, 1], keeps ln finite
            let u2: f64 = rng.gen();
            (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
        })
        .collect()
}
