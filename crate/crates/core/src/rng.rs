//! Seeded random streams.
//!
//! Every stochastic routine takes an explicit `u64` seed. Work is split into
//! fixed-size chunks and chunk `i` draws from ChaCha8 stream `i` of that seed,
//! which makes results independent of the number of worker threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Independent sub-stream `index` of `seed`.
pub fn stream(seed: u64, index: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Samples per chunk in Monte-Carlo loops.
pub const CHUNK: usize = 1024;

/// `(chunk index, samples in chunk)` covering `total` samples.
pub fn chunks(total: usize) -> Vec<(u64, usize)> {
    (0..total.div_ceil(CHUNK))
        .map(|i| (i as u64, CHUNK.min(total - i * CHUNK)))
        .collect()
}
