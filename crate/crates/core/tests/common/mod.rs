//! Reference oracles and builders shared by the integration tests. Everything
//! here is deliberately naive: sorted vectors and linear scans, no heaps, so
//! the production buffers can be checked against an independent model.

#![allow(dead_code)]

use silcr_core::replay::{Trajectory, Transition};

/// What the expert buffer is told about one offer, in offer order.
#[derive(Debug, Clone, Copy)]
pub struct Offer {
    pub id: usize,
    pub ret: f64,
    pub len: usize,
}

/// Ids the priority buffer must retain: sort every offer by return (ties go to
/// the newer offer), then keep from the top while the running total is still
/// below capacity.
pub fn greedy_retained(offers: &[Offer], capacity: usize) -> Vec<usize> {
    let mut sorted: Vec<&Offer> = offers.iter().collect();
    sorted.sort_by(|a, b| b.ret.total_cmp(&a.ret).then(b.id.cmp(&a.id)));
    let mut total = 0usize;
    let mut keep = Vec::new();
    for o in sorted {
        if total >= capacity {
            break;
        }
        keep.push(o.id);
        total += o.len;
    }
    keep.sort_unstable();
    keep
}

/// FIFO model of the online buffer: the last `capacity` pushes, oldest first.
pub fn fifo_retained<T: Clone>(pushed: &[T], capacity: usize) -> Vec<T> {
    let start = pushed.len().saturating_sub(capacity);
    pushed[start..].to_vec()
}

/// Builds a finished trajectory with the given per-step rewards. States encode
/// (id, step) so retained sets can be identified later; the final transition
/// terminates.
pub fn trajectory_with_rewards(id: usize, rewards: &[f64]) -> Trajectory {
    assert!(!rewards.is_empty());
    let transitions: Vec<Transition> = rewards
        .iter()
        .enumerate()
        .map(|(step, &r)| {
            let last = step + 1 == rewards.len();
            Transition {
                state: vec![id as f64, step as f64],
                action: vec![0.0],
                reward_env: r,
                next_state: vec![id as f64, step as f64 + 1.0],
                terminated: last,
                truncated: false,
            }
        })
        .collect();
    Trajectory::new(transitions).unwrap()
}

/// Trajectory id back out of the states written by `trajectory_with_rewards`.
pub fn trajectory_id(t: &Trajectory) -> usize {
    t.transitions()[0].state[0] as usize
}
