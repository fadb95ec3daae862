//! Reward-withholding wrapper: dense rewards are summed silently and paid
//! out in one lump on the episode's final step.

use super::{EnvSpec, Environment, StepResult};
use crate::error::Result;

pub struct EpisodicWrapper {
    inner: Box<dyn Environment>,
    accumulated: f64,
}

impl EpisodicWrapper {
    pub fn new(inner: Box<dyn Environment>) -> Self {
        Self {
            inner,
            accumulated: 0.0,
        }
    }
}

impl Environment for EpisodicWrapper {
    fn spec(&self) -> &EnvSpec {
        self.inner.spec()
    }

    fn reset(&mut self, seed: u64) -> Vec<f64> {
        self.accumulated = 0.0;
        self.inner.reset(seed)
    }

    fn step(&mut self, action: &[f64]) -> Result<StepResult> {
        let mut result = self.inner.step(action)?;
        // Accumulation order matches the step order, so the payout equals a
        // sequential sum of the dense rewards bit-for-bit.
        self.accumulated += result.reward;
        result.reward = if result.terminated || result.truncated {
            std::mem::take(&mut self.accumulated)
        } else {
            0.0
        };
        Ok(result)
    }
}
