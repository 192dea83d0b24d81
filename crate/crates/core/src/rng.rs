//! Seeded, splittable random streams.
//!
//! Every experiment derives its randomness from a root seed. Child streams are
//! addressed by a `(label, index)` pair and map onto independent ChaCha8
//! streams, so trial `i` sees the same bits no matter how trials are scheduled
//! across worker threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The concrete generator handed to every sampling operation.
pub type TrialRng = ChaCha8Rng;

/// Seed used by tooling when the caller does not supply one.
pub const DEFAULT_SEED: u64 = 0x07E5_2016;

/// A root seed from which independent child streams are derived.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SeedStream {
    seed: u64,
}

impl SeedStream {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Derive a sub-seed for a named purpose (e.g. one grid cell of an experiment).
    pub fn fork(&self, label: u64) -> SeedStream {
        SeedStream::new(splitmix64(self.seed ^ splitmix64(label.wrapping_add(0x9E37_79B9))))
    }

    /// The generator for trial `index`. Distinct indices use distinct ChaCha streams.
    pub fn stream(&self, index: u64) -> TrialRng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index);
        rng
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
