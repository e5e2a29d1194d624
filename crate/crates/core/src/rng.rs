//! Seeded random streams.
//!
//! A run owns one [`RngStream`]. Every consumer asks for a substream keyed by
//! `(purpose, generation, index)`, so the draws an individual sees do not
//! depend on the order in which other individuals are processed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// What a substream is used for. Distinct purposes never share draws.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    Init = 1,
    Select = 2,
    Mutate = 3,
    Propose = 4,
    Observe = 5,
    ControllerInit = 6,
    Lookahead = 7,
    Sampling = 8,
    Dataset = 9,
}

/// Generator handed out by [`RngStream::substream`].
pub type StreamRng = ChaCha8Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RngStream {
    seed: u64,
}

impl RngStream {
    pub const fn new(seed: u64) -> Self {
        Self { seed }
    }

    pub const fn seed(&self) -> u64 {
        self.seed
    }

    pub fn substream(&self, purpose: Purpose, generation: u64, index: u64) -> ChaCha8Rng {
        let key = splitmix64(
            self.seed
                ^ splitmix64((purpose as u64).wrapping_mul(0xA24B_AED4_963E_E407) ^ splitmix64(generation)),
        );
        let mut rng = ChaCha8Rng::seed_from_u64(key);
        rng.set_stream(index);
        rng
    }

    /// Child stream for a nested run, e.g. one leg of a grid search.
    pub fn derive(&self, a: u64, b: u64, c: u64) -> RngStream {
        let mut h = splitmix64(self.seed ^ 0x5851_F42D_4C95_7F2D);
        for v in [a, b, c] {
            h = splitmix64(h ^ splitmix64(v.wrapping_add(0x9E37_79B9)));
        }
        RngStream::new(h)
    }
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
