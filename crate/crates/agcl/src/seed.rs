//! Deterministic seed derivation.
//!
//! Every stochastic choice in the crate draws from a `ChaCha8Rng` seeded
//! through [`derive_seed`], so a run is a pure function of its recorded
//! seeds. The mixer is FNV-1a over the parent seed and a tag; it is stable
//! across platforms and releases.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// FNV-1a over a byte slice, starting from `state`.
pub fn fnv1a(mut state: u64, bytes: &[u8]) -> u64 {
    for &b in bytes {
        state ^= u64::from(b);
        state = state.wrapping_mul(FNV_PRIME);
    }
    state
}

/// Derives a child seed from a parent seed and a textual tag.
pub fn derive_seed(parent: u64, tag: &str) -> u64 {
    let state = fnv1a(FNV_OFFSET, &parent.to_le_bytes());
    fnv1a(state, tag.as_bytes())
}

/// Derives a child seed from a parent seed, a tag and an index.
pub fn derive_seed_indexed(parent: u64, tag: &str, index: u64) -> u64 {
    fnv1a(derive_seed(parent, tag), &index.to_le_bytes())
}

/// Seeded RNG for a (parent, tag) pair.
pub fn rng_for(parent: u64, tag: &str) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(parent, tag))
}

/// Seeded RNG for a (parent, tag, index) triple.
pub fn rng_for_indexed(parent: u64, tag: &str, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed_indexed(parent, tag, index))
}
