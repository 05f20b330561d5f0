//! Seed expansion for independent, reproducible random streams.
//!
//! A stream is addressed by `(base seed, family, index)`. The address is mixed
//! with SplitMix64 and the next four SplitMix64 outputs form the 256-bit
//! ChaCha8 key, so streams never overlap and do not depend on which worker
//! thread consumes them.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// One SplitMix64 output step.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministic generator for stream `index` of `family` under `seed`.
pub fn substream(seed: u64, family: u64, index: u64) -> StreamRng {
    let mut state = seed ^ splitmix64(splitmix64(family) ^ index);
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        state = state.wrapping_add(GOLDEN_GAMMA);
        chunk.copy_from_slice(&splitmix64(state).to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

/// Uniform draw on `(0, 1]`, safe to pass to `ln`.
pub fn open_closed_unit<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    1.0 - rng.gen::<f64>()
}
