//! Per-purpose random streams derived from one run seed.
//!
//! A run seed feeds a ChaCha8 generator; each consumer gets its own ChaCha
//! stream id, so the numbers one consumer draws never depend on how many
//! another consumer drew. Adding a new consumer means adding a new variant
//! with a fresh id. Existing ids must never be renumbered.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Dataset = 1,
    Split = 2,
    Base = 3,
}

pub fn stream_rng(seed: u64, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng
}
