//! Transitions, trajectories, and the two replay buffers.
//!
//! Training draws from an online FIFO buffer holding everything the agent did
//! and a priority buffer holding its highest-return trajectories. Neither
//! buffer ever rewrites the environmental reward it stores; relabeling to the
//! constant 0 (online) or 1 (expert) happens on the sampled copies only, so a
//! buffer can always be re-read for what actually happened.

mod demo;

pub use demo::{parse_demos, read_demos, render_demos, write_demos};

use std::cmp::Ordering;
use std::collections::VecDeque;

use rand::RngCore;

use crate::error::{Error, Result};
use crate::rng::index_below;

/// One environment step as stored in the buffers. `reward_env` is the reward
/// the environment actually emitted and is never mutated after storage.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub state: Vec<f64>,
    pub action: Vec<f64>,
    pub reward_env: f64,
    pub next_state: Vec<f64>,
    pub terminated: bool,
    pub truncated: bool,
}

/// A completed episode. The return is the exact running sum of `reward_env`
/// in step order, fixed at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    transitions: Vec<Transition>,
    episodic_return: f64,
}

impl Trajectory {
    pub fn new(transitions: Vec<Transition>) -> Result<Self> {
        let Some(last) = transitions.last() else {
            return Err(Error::Input("a trajectory cannot be empty".into()));
        };
        if last.terminated == last.truncated {
            return Err(Error::Input(
                "a trajectory must end with exactly one of terminated/truncated".into(),
            ));
        }
        if transitions[..transitions.len() - 1]
            .iter()
            .any(|t| t.terminated || t.truncated)
        {
            return Err(Error::Input(
                "only the final transition may end the episode".into(),
            ));
        }
        if transitions.iter().any(|t| !t.reward_env.is_finite()) {
            return Err(Error::Input("non-finite reward in trajectory".into()));
        }
        let (sd, ad) = (transitions[0].state.len(), transitions[0].action.len());
        if transitions
            .iter()
            .any(|t| t.state.len() != sd || t.next_state.len() != sd || t.action.len() != ad)
        {
            return Err(Error::Input(
                "inconsistent state or action dims within trajectory".into(),
            ));
        }
        let episodic_return = transitions.iter().map(|t| t.reward_env).sum();
        Ok(Trajectory {
            transitions,
            episodic_return,
        })
    }

    pub fn episodic_return(&self) -> f64 {
        self.episodic_return
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn len(&self) -> usize {
        self.transitions.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction rejects empty trajectories
    }
}

/// A transition as handed to the learner: same data, but `reward` carries the
/// training signal (constant relabel or the true env reward depending on the
/// sampling path).
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSample {
    pub state: Vec<f64>,
    pub action: Vec<f64>,
    pub reward: f64,
    pub next_state: Vec<f64>,
    pub terminated: bool,
    pub truncated: bool,
}

impl TrainingSample {
    fn from_transition(t: &Transition, reward: f64) -> Self {
        TrainingSample {
            state: t.state.clone(),
            action: t.action.clone(),
            reward,
            next_state: t.next_state.clone(),
            terminated: t.terminated,
            truncated: t.truncated,
        }
    }
}

/// FIFO buffer over individual transitions; evicts oldest-first once full.
#[derive(Debug, Clone)]
pub struct OnlineBuffer {
    data: VecDeque<Transition>,
    capacity: usize,
}

impl OnlineBuffer {
    pub fn new(capacity: usize) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::Config("online buffer capacity must be positive".into()));
        }
        Ok(OnlineBuffer {
            data: VecDeque::new(),
            capacity,
        })
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn store_trajectory(&mut self, trajectory: &Trajectory) {
        self.store_transitions(trajectory.transitions());
    }

    /// Push raw transitions in order; also the path for flushing a partial
    /// episode at the end of training.
    pub fn store_transitions(&mut self, transitions: &[Transition]) {
        for t in transitions {
            if self.data.len() == self.capacity {
                self.data.pop_front();
            }
            self.data.push_back(t.clone());
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = &Transition> {
        self.data.iter()
    }

    /// Uniform sample with replacement, rewards relabeled to the constant 0.
    pub fn sample_relabeled<R: RngCore>(&self, n: usize, rng: &mut R) -> Result<Vec<TrainingSample>> {
        self.sample_with(n, rng, |_| 0.0)
    }

    /// Uniform sample with replacement carrying the true environmental reward.
    pub fn sample_env_reward<R: RngCore>(&self, n: usize, rng: &mut R) -> Result<Vec<TrainingSample>> {
        self.sample_with(n, rng, |t| t.reward_env)
    }

    fn sample_with<R: RngCore>(
        &self,
        n: usize,
        rng: &mut R,
        reward: impl Fn(&Transition) -> f64,
    ) -> Result<Vec<TrainingSample>> {
        if self.data.is_empty() {
            return Err(Error::NotReady("online buffer is empty".into()));
        }
        Ok((0..n)
            .map(|_| {
                let t = &self.data[index_below(rng, self.data.len())];
                TrainingSample::from_transition(t, reward(t))
            })
            .collect())
    }
}

/// Entry ordered by (episodic return, insertion sequence); the minimum is
/// always the eviction candidate, and equal returns evict the older offer.
#[derive(Debug, Clone)]
struct Ranked {
    seq: u64,
    trajectory: Trajectory,
}

impl PartialEq for Ranked {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Ranked {}

impl PartialOrd for Ranked {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Ranked {
    fn cmp(&self, other: &Self) -> Ordering {
        self.trajectory
            .episodic_return()
            .total_cmp(&other.trajectory.episodic_return())
            .then(self.seq.cmp(&other.seq))
    }
}

/// Priority buffer keeping the highest-return trajectories seen so far, whole
/// trajectories only, bounded by a transition-count capacity.
///
/// Storage stays in insertion order, so two buffers holding the same
/// trajectories in the same order sample identically regardless of how they
/// were filled — a live buffer and one reloaded from its dump are
/// interchangeable. Eviction scans for the minimum instead of using a heap;
/// offers arrive once per episode, so the linear scan is never hot.
#[derive(Debug, Clone)]
pub struct ExpertBuffer {
    entries: Vec<Ranked>,
    /// `prefix[i]` = transitions stored before entry `i`; rebuilt on mutation.
    prefix: Vec<usize>,
    capacity: usize,
    total_transitions: usize,
    next_seq: u64,
}

impl ExpertBuffer {
    pub fn new(capacity: usize) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::Config("expert buffer capacity must be positive".into()));
        }
        Ok(ExpertBuffer {
            entries: Vec::new(),
            prefix: Vec::new(),
            capacity,
            total_transitions: 0,
            next_seq: 0,
        })
    }

    /// A frozen buffer sized exactly to a demo set; nothing can evict.
    pub fn from_trajectories(trajectories: Vec<Trajectory>) -> Result<Self> {
        let total: usize = trajectories.iter().map(Trajectory::len).sum();
        if total == 0 {
            return Err(Error::Config("demo set is empty".into()));
        }
        let mut buf = ExpertBuffer::new(total)?;
        for t in trajectories {
            buf.offer(t);
        }
        Ok(buf)
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn transition_count(&self) -> usize {
        self.total_transitions
    }

    pub fn trajectory_count(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Inserts, then evicts minimum-return trajectories while the buffer would
    /// still be at or over capacity without its current minimum. The rule keeps
    /// one oversized trajectory rather than emptying the buffer. Returns
    /// whether the offered trajectory itself survived.
    pub fn offer(&mut self, trajectory: Trajectory) -> bool {
        let seq = self.next_seq;
        self.next_seq += 1;
        self.total_transitions += trajectory.len();
        self.entries.push(Ranked { seq, trajectory });

        let mut survived = true;
        loop {
            let (min_idx, min_len) = {
                let (i, min) = self
                    .entries
                    .iter()
                    .enumerate()
                    .min_by(|a, b| a.1.cmp(b.1))
                    .expect("entries cannot be empty right after a push");
                (i, min.trajectory.len())
            };
            if self.total_transitions - min_len < self.capacity {
                break;
            }
            let evicted = self.entries.remove(min_idx);
            self.total_transitions -= min_len;
            if evicted.seq == seq {
                survived = false;
            }
        }
        self.rebuild_prefix();
        survived
    }

    fn rebuild_prefix(&mut self) {
        self.prefix.clear();
        let mut before = 0;
        for e in &self.entries {
            self.prefix.push(before);
            before += e.trajectory.len();
        }
    }

    /// Stored trajectories in insertion order.
    pub fn trajectories(&self) -> impl Iterator<Item = &Trajectory> {
        self.entries.iter().map(|r| &r.trajectory)
    }

    pub fn retained_returns(&self) -> Vec<f64> {
        self.trajectories().map(Trajectory::episodic_return).collect()
    }

    pub fn min_return(&self) -> Option<f64> {
        self.trajectories()
            .map(Trajectory::episodic_return)
            .min_by(f64::total_cmp)
    }

    pub fn max_return(&self) -> Option<f64> {
        self.trajectories()
            .map(Trajectory::episodic_return)
            .max_by(f64::total_cmp)
    }

    /// Uniform sample with replacement over every stored transition, rewards
    /// relabeled to the constant 1.
    pub fn sample_relabeled<R: RngCore>(&self, n: usize, rng: &mut R) -> Result<Vec<TrainingSample>> {
        if self.total_transitions == 0 {
            return Err(Error::NotReady("expert buffer is empty".into()));
        }
        Ok((0..n)
            .map(|_| {
                let k = index_below(rng, self.total_transitions);
                let entry = self.prefix.partition_point(|&p| p <= k) - 1;
                let t = &self.entries[entry].trajectory;
                TrainingSample::from_transition(&t.transitions()[k - self.prefix[entry]], 1.0)
            })
            .collect())
    }
}

/// The half-and-half batch both self-imitation agents train on: `batch_size/2`
/// online samples relabeled to 0 followed by `batch_size/2` expert samples
/// relabeled to 1.
pub fn make_training_batch<R: RngCore>(
    online: &OnlineBuffer,
    expert: &ExpertBuffer,
    batch_size: usize,
    rng: &mut R,
) -> Result<Vec<TrainingSample>> {
    if batch_size == 0 || batch_size % 2 != 0 {
        return Err(Error::Config(format!(
            "batch size must be even and positive, got {batch_size}"
        )));
    }
    let half = batch_size / 2;
    let mut batch = online.sample_relabeled(half, rng)?;
    batch.extend(expert.sample_relabeled(half, rng)?);
    Ok(batch)
}
