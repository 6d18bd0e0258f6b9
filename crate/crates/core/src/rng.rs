//! Seed derivation.
//!
//! Every random stream in the crate is a [`ChaCha8Rng`] seeded from a `u64`.
//! Child seeds are derived with a SplitMix64 finaliser so that a stream is a
//! pure function of its parent seed and index.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub fn seeded(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// SplitMix64 finaliser.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Child seed for `(parent, stream, index)`.
pub fn derive(parent: u64, stream: u64, index: u64) -> u64 {
    mix64(mix64(parent ^ mix64(stream)) ^ index.wrapping_mul(0xD1B5_4A32_D192_ED03))
}

/// Named streams so that unrelated consumers of one seed never collide.
pub mod stream {
    pub const SPLIT: u64 = 1;
    pub const MEMBER: u64 = 2;
    pub const INIT: u64 = 3;
    pub const SHUFFLE: u64 = 4;
    pub const REPLICATION: u64 = 5;
    pub const FOLDS: u64 = 6;
    pub const ESTIMATOR: u64 = 7;
    pub const PROBE: u64 = 8;
}
