//! Seeded RNG construction and seed derivation.
//!
//! Every stochastic operation in the crate takes a `u64` seed and is a
//! deterministic function of it. Composite operations (sessions, sweeps)
//! derive independent sub-seeds from their master seed with [`derive()`],
//! so each stage draws from its own stream and inserting or removing a
//! stage never perturbs the others.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Build the deterministic generator used everywhere in this crate.
pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derive a sub-seed from a master seed and a stream label.
///
/// SplitMix64 finalizer over the combined value; labels need only be
/// distinct per call site.
pub fn derive(master: u64, label: u64) -> u64 {
    let mut z = master
        .wrapping_add(label.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
