//! Counter-based random streams.
//!
//! Every random draw in the crate comes from a [`RngStream`], a `(seed, stream)`
//! pair feeding ChaCha8. Sweeps derive one stream per task from the master
//! seed and the task coordinates, so results do not depend on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngStream {
    pub seed: u64,
    pub stream: u64,
}

/// Task domains, kept apart so that e.g. network draws never alias
/// per-cell dynamics draws.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u64)]
pub enum Domain {
    Network = 1,
    Cell = 2,
    Scan = 3,
    Misc = 4,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        RngStream { seed, stream }
    }

    /// Stream for the task at `coords` inside `domain`.
    pub fn derive(seed: u64, domain: Domain, coords: &[u64]) -> Self {
        let mut h = splitmix64(domain as u64);
        for &c in coords {
            h = splitmix64(h ^ c);
        }
        RngStream { seed, stream: h }
    }

    /// Child stream of this one; used when a task needs independent sub-draws.
    pub fn child(&self, tag: u64) -> Self {
        RngStream {
            seed: self.seed,
            stream: splitmix64(self.stream ^ splitmix64(tag)),
        }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }
}
