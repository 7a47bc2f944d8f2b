//! Seed derivation for reproducible parallel experiments.
//!
//! Every trial draws from its own ChaCha8 stream seeded with
//! `split(seed, trial_index)`, so results do not depend on how trials are
//! scheduled across threads. `split` is the SplitMix64 finalizer applied to
//! `seed + (index + 1) * 0x9e3779b97f4a7c15`; reimplementations in other
//! languages reproduce the same streams from these constants.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

/// SplitMix64 output function.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives the seed of stream `index` from a master seed.
#[inline]
pub fn split(seed: u64, index: u64) -> u64 {
    mix64(seed.wrapping_add(index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)))
}

pub fn stream(seed: u64) -> StreamRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn substream(seed: u64, index: u64) -> StreamRng {
    stream(split(seed, index))
}
