//! Self-imitation reinforcement learning for continuous control, self-contained.
//!
//! The toolkit trains soft actor-critic agents where the reward signal fed to
//! the critic comes from constant-reward relabeling over two replay buffers: an
//! ordinary FIFO buffer of everything the agent did (relabeled to 0) and a
//! priority buffer of its highest-return trajectories (relabeled to 1). The
//! same machinery runs plain SAC and demo-driven SQIL for comparison.
//!
//! Layout:
//! - [`nn`]: dense networks, backprop, Adam, polyak averaging
//! - [`policy`]: squashed diagonal-Gaussian action distribution
//! - [`replay`]: transitions, trajectories, the two buffers, demo files
//! - [`envs`]: built-in desk-scale control environments
//! - [`agents`]: the actor-critic core and per-algorithm update steps
//! - [`harness`]: training loop, evaluation, ablations, metrics files

pub mod agents;
pub mod envs;
pub mod error;
pub mod harness;
pub mod nn;
pub mod policy;
pub mod replay;
pub mod rng;

mod wire;

pub use error::{Error, Result};
