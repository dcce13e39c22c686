//! Seeded random streams.
//!
//! Every random draw in the crate comes from a ChaCha8 generator keyed by the
//! user seed. Independent purposes (measurement rows, signals, coordinate
//! blocks, eigensolver start vectors, trials) get their own stream number so
//! that changing how many draws one purpose consumes never shifts another.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Measurements = 1,
    Signal = 2,
    Rows = 3,
    Coordinates = 4,
    Eigensolver = 5,
    Subsample = 6,
    Trial = 7,
    Init = 8,
    Test = 15,
}

/// Generator for `stream`, sub-indexed by `index` (e.g. iteration or trial number).
pub fn stream_rng(seed: u64, stream: Stream, index: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((stream as u64) << 48) ^ (index & 0x0000_ffff_ffff_ffff));
    rng
}

/// Derives a child seed, used to give each trial of an experiment its own seed.
pub fn derive_seed(seed: u64, stream: Stream, index: u64) -> u64 {
    use rand::RngCore;
    stream_rng(seed, stream, index).next_u64()
}
