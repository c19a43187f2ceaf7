//! Reproducible per-realization random streams.
//!
//! Realization `i` of a run with master seed `m` draws from
//! `ChaCha8Rng::seed_from_u64(sub_seed(m, i))`, where
//!
//! ```text
//! sub_seed(m, i) = mix64(m + (i + 1) · 0x9E3779B97F4A7C15)   (wrapping u64 arithmetic)
//! mix64(z)       = splitmix64 finalizer:
//!                  z = (z ^ (z >> 30)) · 0xBF58476D1CE4E5B9
//!                  z = (z ^ (z >> 27)) · 0x94D049BB133111EB
//!                  z ^ (z >> 31)
//! ```
//!
//! For a fixed master seed the map `i ↦ sub_seed(m, i)` is a bijection on
//! `u64` (an odd-multiplier affine step followed by an invertible mixer), so
//! distinct realizations never share a stream.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

pub type RealizationRng = ChaCha8Rng;

#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[inline]
pub fn sub_seed(master: u64, index: u64) -> u64 {
    mix64(master.wrapping_add(index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)))
}

pub fn seed_plan(master: u64, count: usize) -> Vec<u64> {
    (0..count as u64).map(|i| sub_seed(master, i)).collect()
}

pub fn realization_rng(master: u64, index: u64) -> RealizationRng {
    ChaCha8Rng::seed_from_u64(sub_seed(master, index))
}
