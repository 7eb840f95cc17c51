//! Explicitly seeded random streams.
//!
//! Every sampled quantity in the crate draws from a [`ChaCha8Rng`] built here.
//! Independent sub-computations (shots, readout flips, calibration runs, sweep
//! cells) use the same seed on distinct ChaCha streams, so results never
//! depend on evaluation order or thread scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type QetRng = ChaCha8Rng;

/// Stream ids used by the protocol pipeline.
pub mod stream {
    pub const SHOTS: u64 = 0;
    pub const READOUT: u64 = 1;
    pub const CALIBRATION: u64 = 2;
    pub const CALIBRATION_READOUT: u64 = 3;
    /// Second circuit of a combined estimate (the V half of `E1`).
    pub const SECONDARY: u64 = 16;
}

pub fn seeded_rng(seed: u64, stream: u64) -> QetRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Derive a child seed for an indexed sub-run (sweep cell, repeated trial).
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    // splitmix64 finalizer over the combined words
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
