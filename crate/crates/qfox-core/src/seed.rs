//! Deterministic RNG stream derivation.
//!
//! Every stochastic component draws from a `ChaCha8Rng` stream keyed by the
//! master seed plus structural indices (run, iteration, agent). Results are
//! therefore independent of evaluation order and thread count.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mix a master seed with structural indices into a derived seed.
pub fn mix(seed: u64, parts: &[u64]) -> u64 {
    let mut z = splitmix64(seed);
    for &p in parts {
        z = splitmix64(z ^ p.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    }
    z
}

/// Instantiate the RNG stream for `(seed, parts)`.
pub fn stream(seed: u64, parts: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(mix(seed, parts))
}
