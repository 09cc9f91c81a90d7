//! Seeded random streams.
//!
//! Every random draw in the crate comes from ChaCha20 keyed by one 64-bit
//! run seed and selected by a 64-bit stream id:
//!
//! * key = little-endian bytes of the seed followed by 24 zero bytes;
//! * stream = FNV-1a 64 hash of a UTF-8 label (component id, purpose, ...),
//!   or an explicit integer for indexed streams;
//! * uniform `[0, 1)` variates use the top 53 bits of each `next_u64`
//!   output: `(w >> 11) * 2^-53`; `[lo, hi)` is `lo + (hi - lo) * u`.
//!
//! Any ChaCha20 implementation with 64-bit stream selection reproduces the
//! streams bit for bit.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

pub fn fnv1a64(label: &str) -> u64 {
    label.bytes().fold(FNV_OFFSET, |h, b| (h ^ u64::from(b)).wrapping_mul(FNV_PRIME))
}

/// Derive a child seed from a parent seed and a label, e.g. per-component
/// seeds from the global seed.
pub fn derive_seed(seed: u64, label: &str) -> u64 {
    Stream::labeled(seed, label).next_u64()
}

#[derive(Clone, Debug)]
pub struct Stream {
    rng: ChaCha20Rng,
}

impl Stream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&seed.to_le_bytes());
        let mut rng = ChaCha20Rng::from_seed(key);
        rng.set_stream(stream);
        Stream { rng }
    }

    pub fn labeled(seed: u64, label: &str) -> Self {
        Self::new(seed, fnv1a64(label))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform on `[0, 1)`.
    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.unit()
    }

    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.unit() < p
    }

    /// Uniform index in `0..n` (n > 0).
    pub fn index(&mut self, n: usize) -> usize {
        ((self.unit() * n as f64) as usize).min(n - 1)
    }
}
