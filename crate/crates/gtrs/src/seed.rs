//! Counter-based seed splitting.
//!
//! Every randomized operation receives a [`SeedStream`]: a 64-bit key plus a
//! derivation path. Children are derived with [`SeedStream::child`] using a
//! fixed tag, so subroutine streams are statistically independent and a run
//! is fully reproducible from the one user-facing seed. Streams are `Copy`;
//! deriving never mutates the parent.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finalizer; the standard 64-bit mixing function.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A splittable, reproducible source of randomness.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedStream {
    key: u64,
}

impl SeedStream {
    pub fn new(seed: u64) -> Self {
        SeedStream {
            key: splitmix64(seed ^ 0xA5A5_A5A5_5A5A_5A5A),
        }
    }

    /// Derive an independent child stream for subroutine `tag`.
    pub fn child(self, tag: u64) -> Self {
        SeedStream {
            key: splitmix64(self.key ^ splitmix64(tag.wrapping_add(0x0123_4567_89AB_CDEF))),
        }
    }

    /// Derive the `i`-th stream of an indexed family (e.g. bisection rounds).
    pub fn child_indexed(self, tag: u64, i: u64) -> Self {
        self.child(tag).child(i.wrapping_add(1))
    }

    /// Concrete RNG for local draws.
    pub fn rng(self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.key)
    }

    pub fn key(self) -> u64 {
        self.key
    }
}
