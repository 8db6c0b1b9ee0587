//! Seed derivation.
//!
//! Every random stream in the crate is a ChaCha8 generator seeded from a
//! 64-bit value. Child seeds are derived from a parent seed and an index with
//! the SplitMix64 finalizer, so trials and records can be generated in any
//! order (or in parallel) and still receive the same stream.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for child `index` of `base`: `mix64(mix64(base) ^ index)`.
pub fn derive(base: u64, index: u64) -> u64 {
    mix64(mix64(base) ^ index)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
