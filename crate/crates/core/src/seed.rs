//! Sub-seed derivation.
//!
//! Every per-item and per-operation random stream is keyed by
//! `mix64(parent_seed, index)`. The mixer is the SplitMix64 finaliser applied
//! to `parent + (index + 1) * GOLDEN_GAMMA`, so the constants below are part of
//! the public reproducibility contract: a third party holding the master seed
//! can regenerate any single item without running the items before it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Weyl increment (2^64 / golden ratio).
pub const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;
pub const MIX_MUL_1: u64 = 0xBF58_476D_1CE4_E5B9;
pub const MIX_MUL_2: u64 = 0x94D0_49BB_1331_11EB;

pub fn mix64(seed: u64, index: u64) -> u64 {
    let mut z = seed.wrapping_add(index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA));
    z = (z ^ (z >> 30)).wrapping_mul(MIX_MUL_1);
    z = (z ^ (z >> 27)).wrapping_mul(MIX_MUL_2);
    z ^ (z >> 31)
}

/// The generator used for every seeded draw in the crate. ChaCha8 output is
/// specified bit-for-bit, independent of platform and word size.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Named streams hanging off a recipe or item seed.
pub(crate) mod stream {
    pub const SCENE: u64 = 0x5C;
    pub const CLOUD: u64 = 1;
    pub const NOISE: u64 = 2;
    pub const MISSING_BANDS: u64 = 3;
    pub const MISSING_ROWS: u64 = 4;
}
