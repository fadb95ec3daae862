//! The classic underpowered car in a valley, with a near-sparse reward.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{checked_action, EnvSpec, Environment, EpisodeClock, StepResult};
use crate::error::Result;

const FORCE_GAIN: f64 = 0.0015;
const GRAVITY_GAIN: f64 = 0.0025;
const MAX_SPEED: f64 = 0.07;
const MIN_POSITION: f64 = -1.2;
const MAX_POSITION: f64 = 0.6;
const GOAL_POSITION: f64 = 0.45;
const GOAL_BONUS: f64 = 10.0;
const CONTROL_COST: f64 = 0.01;

/// State layout: `[position, velocity]`. The engine is too weak to climb the
/// right hill directly; only the small control cost is charged until the car
/// crests the hill, making this the hard-exploration task of the set.
#[derive(Debug, Clone)]
pub struct SparseMountainCar {
    spec: EnvSpec,
    position: f64,
    velocity: f64,
    clock: EpisodeClock,
}

impl SparseMountainCar {
    pub fn new() -> Self {
        Self {
            spec: EnvSpec {
                name: "mountaincar",
                state_dim: 2,
                action_dim: 1,
                action_low: vec![-1.0],
                action_high: vec![1.0],
                max_episode_steps: 500,
            },
            position: 0.0,
            velocity: 0.0,
            clock: EpisodeClock::default(),
        }
    }

    fn state(&self) -> Vec<f64> {
        vec![self.position, self.velocity]
    }
}

impl Default for SparseMountainCar {
    fn default() -> Self {
        Self::new()
    }
}

impl Environment for SparseMountainCar {
    fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    fn reset(&mut self, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.position = rng.gen_range(-0.6..-0.4);
        self.velocity = 0.0;
        self.clock.restart();
        self.state()
    }

    fn step(&mut self, action: &[f64]) -> Result<StepResult> {
        let u = checked_action(&self.spec, action)?[0];
        self.clock.tick(&self.spec)?;

        self.velocity = (self.velocity + FORCE_GAIN * u
            - GRAVITY_GAIN * (3.0 * self.position).cos())
        .clamp(-MAX_SPEED, MAX_SPEED);
        self.position = (self.position + self.velocity).clamp(MIN_POSITION, MAX_POSITION);
        // The left wall is inelastic: momentum into it is lost.
        if self.position <= MIN_POSITION && self.velocity < 0.0 {
            self.velocity = 0.0;
        }

        let reached = self.position >= GOAL_POSITION;
        let mut reward = -CONTROL_COST * u * u;
        if reached {
            reward += GOAL_BONUS;
        }
        let (terminated, truncated) = self.clock.close_out(&self.spec, reached);
        Ok(StepResult {
            next_state: self.state(),
            reward,
            terminated,
            truncated,
        })
    }
}
