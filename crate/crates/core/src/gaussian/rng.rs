//! Counter-based random streams.
//!
//! A stream is the pair `(seed, stream_id)`. It maps to a ChaCha8 key derived
//! from `seed` and the ChaCha stream number `stream_id`, so streams never
//! share keystream. Monte Carlo work is further cut into blocks; block `b`
//! starts at keystream word `b·2^36`, which lets any block be regenerated
//! without replaying the ones before it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Keystream words reserved for each Monte Carlo block.
const BLOCK_WORDS_LOG2: u32 = 36;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngStream {
    pub seed: u64,
    pub stream_id: u64,
}

impl RngStream {
    pub const fn new(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }

    /// A sibling stream with a different id and the same seed.
    pub const fn with_stream(self, stream_id: u64) -> Self {
        Self { seed: self.seed, stream_id }
    }

    /// Generator positioned at the start of the stream.
    pub fn rng(&self) -> ChaCha8Rng {
        self.block(0)
    }

    /// Generator positioned at the start of block `block`.
    pub fn block(&self, block: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng.set_word_pos(u128::from(block) << BLOCK_WORDS_LOG2);
        rng
    }
}
