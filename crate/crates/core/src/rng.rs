//! Seeding for reproducible, worker-count independent sampling.
//!
//! All randomness comes from [`ChaCha8Rng`], a counter-based generator. The
//! 256-bit key is expanded from a 64-bit seed with SplitMix64, and replica
//! streams are keyed by `mix(master, replica_index)`, so the stream used by a
//! replica never depends on which thread runs it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

/// One SplitMix64 output step applied to `x`.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives a child seed from a master seed and a stream index.
pub fn mix(master: u64, index: u64) -> u64 {
    splitmix64(splitmix64(master) ^ index.wrapping_mul(GOLDEN).rotate_left(17))
}

/// Generator for a single seed.
pub fn rng_from_seed(seed: u64) -> SimRng {
    let mut key = [0u8; 32];
    let mut state = seed;
    for chunk in key.chunks_exact_mut(8) {
        state = state.wrapping_add(GOLDEN);
        chunk.copy_from_slice(&splitmix64(state).to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

/// Generator for replica `index` of an experiment seeded with `master`.
pub fn replica_rng(master: u64, index: u64) -> SimRng {
    rng_from_seed(mix(master, index))
}
