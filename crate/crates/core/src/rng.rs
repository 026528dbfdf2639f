//! Seed derivation for reproducible parallel runs.
//!
//! Every independent task (a replicate, a candidate evaluation, an experiment
//! cell) gets its own ChaCha stream keyed by `(base seed, task index)`, so
//! results do not depend on how work is scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a child seed from a parent seed and a task index.
pub fn derive_seed(base: u64, index: u64) -> u64 {
    mix(mix(base) ^ index.rotate_left(32) ^ 0xA076_1D64_78BD_642F)
}

/// RNG for task `stream` under `base`.
pub fn stream_rng(base: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(base);
    rng.set_stream(stream);
    rng
}
