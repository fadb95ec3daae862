//! A point mass accelerating toward a goal on a bounded 2-D arena.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{checked_action, EnvSpec, Environment, EpisodeClock, StepResult};
use crate::error::Result;

const DT: f64 = 0.1;
const DAMPING: f64 = 0.95;
const ARENA_HALF_WIDTH: f64 = 5.0;
/// Spawns stay off the walls so a fresh episode never starts wedged.
const SPAWN_HALF_WIDTH: f64 = 4.5;
const GOAL_RADIUS: f64 = 0.3;
const GOAL_BONUS: f64 = 1.0;
const DISTANCE_COST: f64 = 0.1;

/// State layout: `[agent x, agent y, vel x, vel y, goal x, goal y]`.
/// The action is a 2-D acceleration; reaching within `GOAL_RADIUS` of the
/// goal terminates the episode with a bonus.
#[derive(Debug, Clone)]
pub struct PointGoal2D {
    spec: EnvSpec,
    pos: [f64; 2],
    vel: [f64; 2],
    goal: [f64; 2],
    clock: EpisodeClock,
}

impl PointGoal2D {
    pub fn new() -> Self {
        Self {
            spec: EnvSpec {
                name: "pointgoal",
                state_dim: 6,
                action_dim: 2,
                action_low: vec![-1.0, -1.0],
                action_high: vec![1.0, 1.0],
                max_episode_steps: 200,
            },
            pos: [0.0; 2],
            vel: [0.0; 2],
            goal: [0.0; 2],
            clock: EpisodeClock::default(),
        }
    }

    fn state(&self) -> Vec<f64> {
        vec![
            self.pos[0],
            self.pos[1],
            self.vel[0],
            self.vel[1],
            self.goal[0],
            self.goal[1],
        ]
    }

    fn distance_to_goal(&self) -> f64 {
        let dx = self.pos[0] - self.goal[0];
        let dy = self.pos[1] - self.goal[1];
        (dx * dx + dy * dy).sqrt()
    }
}

impl Default for PointGoal2D {
    fn default() -> Self {
        Self::new()
    }
}

impl Environment for PointGoal2D {
    fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    fn reset(&mut self, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // Draw order is part of the determinism contract: agent x, agent y,
        // goal x, goal y.
        self.pos = [
            rng.gen_range(-SPAWN_HALF_WIDTH..SPAWN_HALF_WIDTH),
            rng.gen_range(-SPAWN_HALF_WIDTH..SPAWN_HALF_WIDTH),
        ];
        self.goal = [
            rng.gen_range(-SPAWN_HALF_WIDTH..SPAWN_HALF_WIDTH),
            rng.gen_range(-SPAWN_HALF_WIDTH..SPAWN_HALF_WIDTH),
        ];
        self.vel = [0.0; 2];
        self.clock.restart();
        self.state()
    }

    fn step(&mut self, action: &[f64]) -> Result<StepResult> {
        let a = checked_action(&self.spec, action)?;
        self.clock.tick(&self.spec)?;

        for axis in 0..2 {
            self.vel[axis] = DAMPING * (self.vel[axis] + a[axis] * DT);
            let raw = self.pos[axis] + self.vel[axis] * DT;
            self.pos[axis] = raw.clamp(-ARENA_HALF_WIDTH, ARENA_HALF_WIDTH);
            // Hitting a wall kills the momentum into it.
            if self.pos[axis] != raw {
                self.vel[axis] = 0.0;
            }
        }

        let dist = self.distance_to_goal();
        let reached = dist < GOAL_RADIUS;
        let mut reward = -DISTANCE_COST * dist;
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
