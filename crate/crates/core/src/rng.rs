//! Seed derivation.
//!
//! Every stochastic choice draws from a ChaCha stream whose seed is mixed
//! from a global seed and one or more scope values. The mixing function is
//! SplitMix64 finalisation applied to the running state, so derived seeds
//! are stable across platforms and releases.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// Scope tags used when deriving per-purpose streams.
pub mod scope {
    pub const EPISODE: u64 = 0x4550_4953_4f44_4531;
    pub const EXPLORE: u64 = 0x4558_504c_4f52_4531;
    pub const EXPLOIT: u64 = 0x4558_504c_4f49_5431;
    pub const GENERATE: u64 = 0x4745_4e45_5241_5431;
    pub const AUGMENT: u64 = 0x4155_474d_454e_5431;
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mix `parts` into `seed`, order-sensitive.
pub fn derive_seed(seed: u64, parts: &[u64]) -> u64 {
    parts
        .iter()
        .fold(splitmix64(seed), |acc, &p| splitmix64(acc ^ splitmix64(p)))
}

pub fn rng_from(seed: u64, parts: &[u64]) -> Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, parts))
}
