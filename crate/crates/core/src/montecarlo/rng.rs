//! Counter-based random streams.
//!
//! Every trial draws from a ChaCha8 instance whose 256-bit key holds
//! `(master_seed, trial)` and whose stream id selects the walker, so a
//! trial's randomness depends only on those three numbers. ChaCha8 output
//! is specified bit-for-bit, which keeps runs reproducible across
//! platforms and thread counts.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent-looking child seed for sub-task `index` of `master`.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    splitmix64(master ^ splitmix64(index.wrapping_mul(GOLDEN_GAMMA)))
}

/// Generator for `(master_seed, trial, stream)`.
pub fn substream(master_seed: u64, trial: u64, stream: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&master_seed.to_le_bytes());
    key[8..16].copy_from_slice(&trial.to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(stream);
    rng
}
