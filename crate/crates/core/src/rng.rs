//! Counter-based random streams.
//!
//! Every independent unit of work (a Monte Carlo replicate, one layer of one
//! generation) gets its own ChaCha stream addressed by a key path such as
//! `(seed, replicate, generation, layer)`. Results therefore do not depend on
//! how work is scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Hash a key path into a single 64-bit stream id.
pub fn stream_id(key: &[u64]) -> u64 {
    key.iter()
        .fold(0x6A09_E667_F3BC_C908, |acc, &k| splitmix64(acc ^ splitmix64(k)))
}

/// The stream for `key` under `seed`.
pub fn stream(seed: u64, key: &[u64]) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_id(key));
    rng
}

/// A seed plus a key prefix; children extend the prefix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StreamKey {
    seed: u64,
    path: Vec<u64>,
}

impl StreamKey {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            path: Vec::new(),
        }
    }

    pub fn child(&self, index: u64) -> Self {
        let mut path = self.path.clone();
        path.push(index);
        Self {
            seed: self.seed,
            path,
        }
    }

    pub fn rng(&self) -> StreamRng {
        stream(self.seed, &self.path)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}
