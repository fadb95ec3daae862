//! Torque-limited pendulum swing-up.

use std::f64::consts::{PI, TAU};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{checked_action, EnvSpec, Environment, EpisodeClock, StepResult};
use crate::error::Result;

const DT: f64 = 0.05;
const MAX_SPEED: f64 = 8.0;
const MAX_TORQUE: f64 = 2.0;
// theta_ddot = (3 g / 2 l) sin(theta) + (3 / m l^2) u, with g=10, m=1, l=1.
const GRAVITY_GAIN: f64 = 15.0;
const TORQUE_GAIN: f64 = 3.0;

/// State layout: `[cos theta, sin theta, theta_dot]`, with theta = 0 upright.
/// The torque is too weak to lift the pendulum directly, so solving the task
/// requires pumping energy by swinging. The episode never terminates early;
/// it always runs to the step limit.
#[derive(Debug, Clone)]
pub struct PendulumSwingUp {
    spec: EnvSpec,
    theta: f64,
    theta_dot: f64,
    clock: EpisodeClock,
}

impl PendulumSwingUp {
    pub fn new() -> Self {
        Self {
            spec: EnvSpec {
                name: "pendulum",
                state_dim: 3,
                action_dim: 1,
                action_low: vec![-MAX_TORQUE],
                action_high: vec![MAX_TORQUE],
                max_episode_steps: 200,
            },
            theta: 0.0,
            theta_dot: 0.0,
            clock: EpisodeClock::default(),
        }
    }

    fn state(&self) -> Vec<f64> {
        vec![self.theta.cos(), self.theta.sin(), self.theta_dot]
    }
}

impl Default for PendulumSwingUp {
    fn default() -> Self {
        Self::new()
    }
}

/// Maps an unwrapped angle into [-pi, pi).
fn wrap_angle(theta: f64) -> f64 {
    (theta + PI).rem_euclid(TAU) - PI
}

impl Environment for PendulumSwingUp {
    fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    fn reset(&mut self, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.theta = rng.gen_range(-PI..PI);
        self.theta_dot = rng.gen_range(-1.0..1.0);
        self.clock.restart();
        self.state()
    }

    fn step(&mut self, action: &[f64]) -> Result<StepResult> {
        let u = checked_action(&self.spec, action)?[0];
        self.clock.tick(&self.spec)?;

        // The cost is charged on the state the torque was applied in, so the
        // upright fixed point with zero torque costs exactly zero.
        let angle = wrap_angle(self.theta);
        let reward =
            -(angle * angle + 0.1 * self.theta_dot * self.theta_dot + 0.001 * u * u);

        let theta_ddot = GRAVITY_GAIN * self.theta.sin() + TORQUE_GAIN * u;
        self.theta_dot = (self.theta_dot + theta_ddot * DT).clamp(-MAX_SPEED, MAX_SPEED);
        self.theta += self.theta_dot * DT;

        let (terminated, truncated) = self.clock.close_out(&self.spec, false);
        Ok(StepResult {
            next_state: self.state(),
            reward,
            terminated,
            truncated,
        })
    }
}
