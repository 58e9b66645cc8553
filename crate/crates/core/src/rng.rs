//! Seeded random streams.
//!
//! Every stochastic component draws from ChaCha8 (`rand_chacha`), seeded with
//! `seed_from_u64`. ChaCha's output is specified bit-for-bit, so identical
//! seeds give identical draws on every platform. Independent substreams use
//! ChaCha's 64-bit stream selector.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type SsmRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SsmRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Stream `stream` of the generator seeded by `seed`.
pub fn substream(seed: u64, stream: u64) -> SsmRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Uniform draw on `[lo, hi)` from 53 random mantissa bits.
pub fn uniform(rng: &mut SsmRng, lo: f64, hi: f64) -> f64 {
    let unit: f64 = rng.gen();
    lo + (hi - lo) * unit
}
