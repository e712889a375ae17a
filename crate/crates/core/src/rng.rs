//! Seeded, serializable random source.
//!
//! Every sampler takes a `&mut RandomSource` explicitly. The full generator
//! state (key, stream, position) can be captured and restored, which lets a
//! persisted chain resume exactly where it stopped.

use rand::distr::Open01;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RandomSource(ChaCha20Rng);

/// Text form of a [`RandomSource`]: 32-byte key in hex, stream id and word
/// position.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngState {
    pub key: String,
    pub stream: u64,
    /// Decimal string; u128 is not portable through JSON numbers.
    pub word_pos: String,
}

impl RandomSource {
    pub fn seed_from_u64(seed: u64) -> Self {
        RandomSource(ChaCha20Rng::seed_from_u64(seed))
    }

    /// Independent stream for coordinate `index` of a mechanism seeded with
    /// `seed`. Streams do not depend on the vector length.
    pub fn for_coordinate(seed: u64, index: u64) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        rng.set_stream(index);
        RandomSource(rng)
    }

    /// Independent stream for batch `index` of an audit run.
    pub fn for_batch(seed: u64, index: u64) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
        rng.set_stream(index);
        RandomSource(rng)
    }

    /// Uniform on [0, 1).
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        self.0.random::<f64>()
    }

    /// Uniform on (0, 1]; safe to take the logarithm of.
    #[inline]
    pub fn uniform_nonzero(&mut self) -> f64 {
        1.0 - self.0.random::<f64>()
    }

    /// Uniform on the open interval (0, 1).
    #[inline]
    pub fn uniform_open(&mut self) -> f64 {
        self.0.sample(Open01)
    }

    /// Raw 64 random bits, e.g. to seed a child source.
    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    /// +1.0 or -1.0 with equal probability.
    #[inline]
    pub fn sign(&mut self) -> f64 {
        if self.0.next_u32() & 1 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    pub fn state(&self) -> RngState {
        let key: String = self
            .0
            .get_seed()
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect();
        RngState {
            key,
            stream: self.0.get_stream(),
            word_pos: self.0.get_word_pos().to_string(),
        }
    }

    pub fn from_state(state: &RngState) -> Result<Self> {
        if state.key.len() != 64 || !state.key.is_ascii() {
            return Err(Error::Parse(format!("bad rng key {:?}", state.key)));
        }
        let mut seed = [0u8; 32];
        for (i, byte) in seed.iter_mut().enumerate() {
            *byte = u8::from_str_radix(&state.key[2 * i..2 * i + 2], 16)
                .map_err(|e| Error::Parse(format!("bad rng key: {e}")))?;
        }
        let word_pos: u128 = state
            .word_pos
            .parse()
            .map_err(|e| Error::Parse(format!("bad rng word position: {e}")))?;
        let mut rng = ChaCha20Rng::from_seed(seed);
        rng.set_stream(state.stream);
        rng.set_word_pos(word_pos);
        Ok(RandomSource(rng))
    }
}
