//! Seeded random streams.
//!
//! Every stochastic routine draws from a ChaCha generator keyed by a `u64`
//! seed and a named stream, so components can be reproduced independently.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Named sub-streams of a seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Parameters = 1,
    Covariates = 2,
    Treatment = 3,
    Noise = 4,
    Labels = 5,
    Search = 6,
    Resample = 7,
    Folds = 8,
    Smote = 9,
    Split = 10,
}

pub fn stream(seed: u64, which: Stream) -> StreamRng {
    stream_raw(seed, which as u64)
}

pub fn stream_raw(seed: u64, id: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Derives a child seed; used to give each replicate or resample its own key.
pub fn child_seed(seed: u64, index: u64) -> u64 {
    // splitmix64 finalizer over the pair
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
