//! Seed derivation.
//!
//! Every random stream in the crate is a ChaCha8 generator keyed by a `u64`
//! obtained from a parent seed through [`derive`]. The derivation is a
//! splitmix64 finalizer over `parent + (stream + 1) * GOLDEN`, and is part of
//! the stable on-disk contract: replicate `k` of an experiment with master
//! seed `m` always uses `derive(m, k)`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// The splitmix64 output function.
pub fn splitmix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Child seed number `stream` of `parent`.
pub fn derive(parent: u64, stream: u64) -> u64 {
    splitmix64(parent.wrapping_add(stream.wrapping_add(1).wrapping_mul(GOLDEN)))
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Named sub-streams used inside one run.
pub mod stream {
    pub const BABBLE: u64 = 1;
    pub const INITIAL_TRAIN: u64 = 2;
    pub const POLICY: u64 = 3;
    pub const REFINE: u64 = 4;
    pub const CALIBRATE: u64 = 5;
    pub const TEST_FEATURES: u64 = 6;
    pub const TRACK_FEATURE: u64 = 7;
}
