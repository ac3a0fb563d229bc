//! Seeded, splittable random streams.
//!
//! Every stream is a ChaCha8 generator (`rand_chacha::ChaCha8Rng`) keyed by
//! the 64-bit root seed and positioned on its own 64-bit stream index, so
//! streams never overlap and `(seed, stream)` always reproduces the same
//! sequence. Gaussian variates use `rand_distr::StandardNormal` (ziggurat).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

pub const RNG_ALGORITHM: &str = "chacha8-stream/ziggurat-normal";

#[derive(Clone, Debug)]
pub struct RngStream {
    root_seed: u64,
    stream: u64,
    rng: ChaCha8Rng,
}

/// Serializable position of an [`RngStream`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngStreamState {
    pub algorithm: String,
    pub root_seed: u64,
    pub stream: u64,
    /// Word position inside the ChaCha keystream, as a decimal string.
    pub word_pos: String,
}

impl RngStream {
    pub fn new(root_seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(root_seed);
        rng.set_stream(stream);
        RngStream { root_seed, stream, rng }
    }

    pub fn root_seed(&self) -> u64 {
        self.root_seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    #[inline]
    pub fn normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    /// Uniform on `[0, 1)`.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    pub fn save(&self) -> RngStreamState {
        RngStreamState {
            algorithm: RNG_ALGORITHM.to_string(),
            root_seed: self.root_seed,
            stream: self.stream,
            word_pos: self.rng.get_word_pos().to_string(),
        }
    }

    pub fn restore(state: &RngStreamState) -> crate::Result<Self> {
        if state.algorithm != RNG_ALGORITHM {
            return Err(crate::Error::Parse(format!("unknown rng algorithm {:?}", state.algorithm)));
        }
        let pos: u128 = state
            .word_pos
            .parse()
            .map_err(|e| crate::Error::Parse(format!("bad rng word position {:?}: {e}", state.word_pos)))?;
        let mut s = RngStream::new(state.root_seed, state.stream);
        s.rng.set_word_pos(pos);
        Ok(s)
    }
}
