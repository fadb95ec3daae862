//! Built-in continuous-control tasks and the episodic-reward wrapper.
//!
//! All tasks share one contract: `reset(seed)` is a pure function of the seed,
//! `step` is deterministic, and actions arriving outside the declared bounds
//! are clamped rather than rejected. Episodes end either by `terminated`
//! (the task reached a goal state) or `truncated` (step limit), never both.
//! In episodic mode the reward signal is withheld until the final step, which
//! then carries the exact undiscounted sum of the dense rewards.

mod episodic;
mod mountain_car;
mod pendulum;
mod point_goal;

pub use episodic::EpisodicWrapper;
pub use mountain_car::SparseMountainCar;
pub use pendulum::PendulumSwingUp;
pub use point_goal::PointGoal2D;

use crate::error::{Error, Result};

/// Static description of an environment's observation and action spaces.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvSpec {
    pub name: &'static str,
    pub state_dim: usize,
    pub action_dim: usize,
    pub action_low: Vec<f64>,
    pub action_high: Vec<f64>,
    pub max_episode_steps: u64,
}

/// One transition's worth of feedback from `Environment::step`.
#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    pub next_state: Vec<f64>,
    pub reward: f64,
    pub terminated: bool,
    pub truncated: bool,
}

pub trait Environment: Send {
    fn spec(&self) -> &EnvSpec;

    /// Starts a fresh episode. The initial state is a deterministic function
    /// of the seed.
    fn reset(&mut self, seed: u64) -> Vec<f64>;

    /// Advances the dynamics one step. Rejects NaN and wrongly-sized actions;
    /// merely out-of-range components are clamped to the declared bounds.
    fn step(&mut self, action: &[f64]) -> Result<StepResult>;
}

/// Builds a named environment, optionally wrapped into episodic-reward mode.
///
/// Valid names: `pointgoal`, `pendulum`, `mountaincar`.
pub fn make_env(name: &str, episodic: bool) -> Result<Box<dyn Environment>> {
    let dense: Box<dyn Environment> = match name {
        "pointgoal" => Box::new(PointGoal2D::new()),
        "pendulum" => Box::new(PendulumSwingUp::new()),
        "mountaincar" => Box::new(SparseMountainCar::new()),
        other => {
            return Err(Error::Config(format!(
                "unknown environment {other:?}; valid names are pointgoal, pendulum, mountaincar"
            )))
        }
    };
    Ok(if episodic {
        Box::new(EpisodicWrapper::new(dense))
    } else {
        dense
    })
}

/// Maps a policy action in `(-1, 1)^d` onto the environment's action bounds.
pub fn rescale_action(spec: &EnvSpec, action: &[f64]) -> Result<Vec<f64>> {
    if action.len() != spec.action_dim {
        return Err(Error::Shape(format!(
            "action has {} components, {} expects {}",
            action.len(),
            spec.name,
            spec.action_dim
        )));
    }
    Ok(action
        .iter()
        .zip(spec.action_low.iter().zip(&spec.action_high))
        .map(|(&a, (&lo, &hi))| lo + (a + 1.0) / 2.0 * (hi - lo))
        .collect())
}

/// Validates an incoming action and returns it clamped to the environment's
/// action bounds.
fn checked_action(spec: &EnvSpec, action: &[f64]) -> Result<Vec<f64>> {
    if action.len() != spec.action_dim {
        return Err(Error::Shape(format!(
            "action has {} components, {} expects {}",
            action.len(),
            spec.name,
            spec.action_dim
        )));
    }
    if action.iter().any(|a| a.is_nan()) {
        return Err(Error::Input(format!("NaN action passed to {}", spec.name)));
    }
    Ok(action
        .iter()
        .zip(spec.action_low.iter().zip(&spec.action_high))
        .map(|(&a, (&lo, &hi))| a.clamp(lo, hi))
        .collect())
}

/// Shared bookkeeping for episode position and the finished flag.
#[derive(Debug, Clone, Default)]
struct EpisodeClock {
    steps: u64,
    finished: bool,
}

impl EpisodeClock {
    fn restart(&mut self) {
        self.steps = 0;
        self.finished = false;
    }

    /// Call once per step before computing dynamics. Fails if the previous
    /// episode already ended and nobody reset.
    fn tick(&mut self, spec: &EnvSpec) -> Result<()> {
        if self.finished {
            return Err(Error::Input(format!(
                "episode in {} is over; reset before stepping again",
                spec.name
            )));
        }
        self.steps += 1;
        Ok(())
    }

    /// Resolves the episode-ending flags: termination wins over the timeout.
    fn close_out(&mut self, spec: &EnvSpec, terminated: bool) -> (bool, bool) {
        let truncated = !terminated && self.steps >= spec.max_episode_steps;
        self.finished = terminated || truncated;
        (terminated, truncated)
    }
}
