//! Seed derivation and named random streams.
//!
//! Every replication owns one root seed. Each consumer of randomness
//! (covariates, treatment draws, outcome noise, fold assignment, match order)
//! draws from its own ChaCha stream keyed by that seed, so enabling or
//! disabling one consumer never shifts the numbers another one sees.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Covariates = 1,
    Treatment = 2,
    OutcomeNoise = 3,
    Folds = 4,
    MatchOrder = 5,
}

/// Deterministic generator for one named stream of a seed.
pub fn stream_rng(seed: u64, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng
}

/// SplitMix64 finaliser.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of replication `index` under `root`.
pub fn replication_seed(root: u64, index: u64) -> u64 {
    mix(mix(root) ^ index.wrapping_mul(0xD1B5_4A32_D192_ED03))
}
