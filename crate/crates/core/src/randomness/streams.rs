//! Seedable counter-based RNG streams.
//!
//! Every stochastic routine in the crate draws from a stream addressed by
//! `(seed, purpose, index)`. Streams are independent ChaCha8 states, so results
//! are reproducible bit-for-bit regardless of call interleaving or thread
//! count, and a single sample can be re-derived in isolation.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

pub fn stream_rng(seed: u64, purpose: &str, index: u64) -> ChaCha8Rng {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update([0x1f]);
    h.update(purpose.as_bytes());
    h.update([0x1f]);
    h.update(index.to_le_bytes());
    let digest = h.finalize();
    let mut key = [0u8; 32];
    key.copy_from_slice(&digest[..32]);
    ChaCha8Rng::from_seed(key)
}

/// A derived 64-bit sub-seed, for handing a whole seeded sub-computation its
/// own namespace.
pub fn derive_seed(seed: u64, purpose: &str, index: u64) -> u64 {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update([0x2f]);
    h.update(purpose.as_bytes());
    h.update([0x2f]);
    h.update(index.to_le_bytes());
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().unwrap())
}
