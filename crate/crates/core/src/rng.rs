//! Seed derivation. Every stochastic step draws from its own ChaCha stream,
//! keyed by the master seed plus a purpose tag and an index, so no result
//! depends on iteration order or on how work is split between threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Purpose tags mixed into stream keys.
pub mod tag {
    pub const SIM: u64 = 0x5349_4d00;
    pub const SHADOW: u64 = 0x5348_4144;
    pub const BASELINE: u64 = 0x4241_5345;
    pub const LOCAL: u64 = 0x4c4f_4341;
    pub const PROTOCOL: u64 = 0x5052_4f54;
}

fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive a child seed from a parent seed and a sequence of words.
pub fn derive(seed: u64, words: &[u64]) -> u64 {
    words.iter().fold(mix(seed), |acc, &w| mix(acc ^ mix(w)))
}

/// A fresh generator for the stream identified by `(seed, tag, index)`.
pub fn stream(seed: u64, tag: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive(seed, &[tag, index]))
}

/// Uniform integer in `[0, n)` from one 64-bit word (multiply-shift). Used
/// for counter-based per-row draws, where the word comes from [`derive`].
#[inline]
pub(crate) fn below(word: u64, n: u64) -> u64 {
    ((word as u128 * n as u128) >> 64) as u64
}
