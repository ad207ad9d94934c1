//! Seeded randomness.
//!
//! Every stochastic component draws from a [`ChaCha8Rng`] seeded with a
//! 64-bit value. Sub-seeds are derived by folding a list of words into the
//! parent seed with the SplitMix64 finalizer, so the stream a component sees
//! depends only on its (parent seed, tag, indices) path and never on the order
//! in which work is scheduled.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// SplitMix64 output function.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// FNV-1a of a tag string, used to turn component names into words.
pub fn tag_word(tag: &str) -> u64 {
    tag.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3)
    })
}

/// Derives a child seed from `parent` and a path of words.
pub fn derive(parent: u64, path: &[u64]) -> u64 {
    path.iter().fold(mix64(parent), |acc, &w| mix64(acc ^ mix64(w)))
}

/// Derives a child seed from `parent` and a component tag.
pub fn derive_tagged(parent: u64, tag: &str) -> u64 {
    derive(parent, &[tag_word(tag)])
}

pub fn seeded(seed: u64) -> Rng {
    Rng::seed_from_u64(seed)
}
