//! Seeded random number generation.
//!
//! Everything random in this crate is driven by ChaCha8 (`rand_chacha`),
//! seeded from a caller-supplied `u64`. ChaCha supports 2^64 independent
//! streams per seed, which is what makes the evaluator reproducible under
//! parallel execution: the trial at round `t`, index `i` always reads stream
//! `((t + 1) << 32) | i` of the run seed, no matter which thread executes it
//! or in what order.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator for single-stream uses (transforms, image synthesis).
pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Generator for one evaluation trial, independent of scheduling.
///
/// Streams start at `1 << 32` so they never collide with the default stream 0
/// handed out by [`seeded`].
pub fn trial(seed: u64, round: u32, index: u32) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((u64::from(round) + 1) << 32) | u64::from(index));
    rng
}

/// Fisher-Yates shuffle driven by the supplied generator.
pub fn shuffle<T>(items: &mut [T], rng: &mut ChaCha8Rng) {
    use rand::Rng;
    for i in (1..items.len()).rev() {
        let j = rng.random_range(0..=i);
        items.swap(i, j);
    }
}

/// A uniformly random permutation of `0..len`.
pub fn permutation(len: usize, rng: &mut ChaCha8Rng) -> Vec<u32> {
    let mut perm: Vec<u32> = (0..len as u32).collect();
    shuffle(&mut perm, rng);
    perm
}
