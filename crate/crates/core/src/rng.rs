//! Seeded random streams.
//!
//! Every random draw in the crate comes from a ChaCha8 generator keyed by a
//! 64-bit seed and a stream number, so independent consumers (topology,
//! sensors, emissions, k-means restarts) never share a sequence.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

pub const STREAM_TOPOLOGY: u64 = 1;
pub const STREAM_CHURN: u64 = 2;
pub const STREAM_SENSORS: u64 = 3;
pub const STREAM_PLACEMENT: u64 = 4;
pub const STREAM_EMISSION: u64 = 5;
pub const STREAM_KMEANS: u64 = 6;

pub fn stream(seed: u64, stream: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
