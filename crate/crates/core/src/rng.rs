//! Deterministic random substreams.
//!
//! Every simulated path owns its own ChaCha8 stream. The splitting rule is:
//! the master seed initialises the key (through `seed_from_u64`) and the
//! 64-bit stream id is `CHANNELS * path + channel`. Path `i` therefore sees
//! the same numbers no matter how many paths are run, and the clock and the
//! Brownian driver of one path never share a stream.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type PathRng = ChaCha8Rng;

/// Number of stream ids reserved per path.
pub const CHANNELS: u64 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Channel {
    Clock = 0,
    Noise = 1,
    Aux = 2,
}

/// Stream for `channel` of path `path` under `master_seed`.
pub fn substream(master_seed: u64, path: u64, channel: Channel) -> PathRng {
    assert!(path < u64::MAX / CHANNELS, "path index out of range");
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(path * CHANNELS + channel as u64);
    rng
}

/// The pair of independent streams driving one (clock, noise) path.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PathStreams {
    pub seed: u64,
    pub path: u64,
}

impl PathStreams {
    pub fn new(seed: u64, path: u64) -> Self {
        Self { seed, path }
    }

    pub fn clock(&self) -> PathRng {
        substream(self.seed, self.path, Channel::Clock)
    }

    pub fn noise(&self) -> PathRng {
        substream(self.seed, self.path, Channel::Noise)
    }

    pub fn aux(&self) -> PathRng {
        substream(self.seed, self.path, Channel::Aux)
    }
}
