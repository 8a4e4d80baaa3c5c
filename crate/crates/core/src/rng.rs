//! Reproducible random streams.
//!
//! Every randomized routine draws from ChaCha8 seeded by `seed_from_u64(seed)`
//! (the seed is expanded with PCG32, as defined by `rand_core`). Independent
//! sub-streams use ChaCha's 64-bit stream id, so a round/component pair always
//! sees the same numbers regardless of evaluation order or platform.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// The main stream for `seed`.
pub fn main_stream(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Sub-stream `(a, b)` of `seed`, e.g. `(round, component)`.
pub fn stream(seed: u64, a: u32, b: u32) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1 + ((a as u64) << 32 | b as u64));
    rng
}
