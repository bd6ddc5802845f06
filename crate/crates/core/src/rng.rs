//! Seeded randomness. Every sampler in the workspace draws from SplitMix64 so
//! a `u64` seed reproduces a run bit for bit.

use rand::SeedableRng;
pub use rand_xoshiro::SplitMix64;

pub fn seeded(seed: u64) -> SplitMix64 {
    SplitMix64::seed_from_u64(seed)
}

/// Independent stream for the `index`-th task of a seeded run, so parallel
/// tasks do not depend on scheduling order.
pub fn substream(seed: u64, index: u64) -> SplitMix64 {
    let mut base = seeded(seed ^ index.wrapping_mul(0x9e37_79b9_7f4a_7c15));
    SplitMix64::from_rng(&mut base)
}
