//! Seeded random streams.
//!
//! Training uses several logically independent sources of randomness (exploration
//! noise, environment resets, replay sampling, evaluation). Each gets its own
//! ChaCha stream derived from the master seed so that consuming one stream never
//! shifts another, which is what makes end-to-end runs reproducible.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// The independent consumers of randomness inside a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    /// Network weight initialization.
    Init,
    /// Environment reset seeds during training rollouts.
    Env,
    /// Exploration noise for action sampling and target-action sampling.
    Policy,
    /// Index draws when sampling replay batches.
    Buffer,
    /// Environment reset seeds during evaluation.
    Eval,
}

impl Stream {
    fn id(self) -> u64 {
        match self {
            Stream::Init => 1,
            Stream::Env => 2,
            Stream::Policy => 3,
            Stream::Buffer => 4,
            Stream::Eval => 5,
        }
    }
}

/// A deterministic generator for the given master seed and stream.
pub fn seeded(master_seed: u64, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(stream.id());
    rng
}

/// Stateless mix of a seed with an index, used to derive per-network and
/// per-episode seeds. SplitMix64 finalizer: consecutive inputs map to
/// well-separated outputs.
pub fn derive_seed(master_seed: u64, index: u64) -> u64 {
    let mut z = master_seed
        .wrapping_add(index.wrapping_mul(0x9e37_79b9_7f4a_7c15))
        .wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Full state of a ChaCha generator, exact enough to resume the stream
/// at the same position after a checkpoint round-trip.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RngSnapshot {
    pub seed: [u8; 32],
    pub stream: u64,
    pub word_pos: u128,
}

impl RngSnapshot {
    pub fn capture(rng: &ChaCha8Rng) -> Self {
        RngSnapshot {
            seed: rng.get_seed(),
            stream: rng.get_stream(),
            word_pos: rng.get_word_pos(),
        }
    }

    pub fn restore(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::from_seed(self.seed);
        rng.set_stream(self.stream);
        rng.set_word_pos(self.word_pos);
        rng
    }
}

/// Uniform draw from `[0, bound)` without going through a distribution object;
/// used for replay index sampling where `bound` changes on every call.
pub fn index_below<R: RngCore>(rng: &mut R, bound: usize) -> usize {
    debug_assert!(bound > 0);
    (rng.next_u64() % bound as u64) as usize
}
