//! Seeded randomness.
//!
//! Every randomized algorithm takes a `u64` seed and builds its own
//! [`SeededRng`], so runs are reproducible bit for bit.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type SeededRng = ChaCha8Rng;

pub fn from_seed(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform draw in `[0, 1)`.
#[inline]
pub fn unit(rng: &mut SeededRng) -> f64 {
    rng.gen::<f64>()
}

/// `true` with probability `p` (clamped to `[0, 1]`). Always consumes one draw.
#[inline]
pub fn bernoulli(rng: &mut SeededRng, p: f64) -> bool {
    let u = unit(rng);
    u < p
}
