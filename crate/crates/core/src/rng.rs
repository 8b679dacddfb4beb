//! Seeded random streams.
//!
//! Every stochastic step draws from ChaCha8 (`rand_chacha::ChaCha8Rng`) seeded
//! through `seed_from_u64`. Bounded integers use Lemire's widening-multiply
//! method with rejection and uniform floats take the top 53 bits of a `u64`,
//! both implemented here so that outputs do not depend on how `rand` samples
//! ranges in a given release.
//!
//! Independent consumers of one replica seed (edge shuffle, site dilution,
//! transparent-node selection) are separated by XOR-ing a fixed stream tag
//! into the seed before expansion.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Named sub-streams derived from a replica seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Shuffle,
    Dilution,
    Transparency,
    Bernoulli,
}

impl Stream {
    fn tag(self) -> u64 {
        match self {
            Stream::Shuffle => 0,
            Stream::Dilution => 0x9e37_79b9_7f4a_7c15,
            Stream::Transparency => 0xbf58_476d_1ce4_e5b9,
            Stream::Bernoulli => 0x94d0_49bb_1331_11eb,
        }
    }
}

pub struct SimRng(ChaCha8Rng);

impl SimRng {
    pub fn new(seed: u64, stream: Stream) -> Self {
        SimRng(ChaCha8Rng::seed_from_u64(seed ^ stream.tag()))
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    /// Uniform in `[0, 1)` with 53 bits of resolution.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in `[0, bound)`.
    #[inline]
    pub fn below(&mut self, bound: u64) -> u64 {
        debug_assert!(bound > 0);
        let threshold = bound.wrapping_neg() % bound;
        loop {
            let m = (self.next_u64() as u128) * (bound as u128);
            if (m as u64) >= threshold {
                return (m >> 64) as u64;
            }
        }
    }

    #[inline]
    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.uniform() < p
    }

    /// Fisher-Yates shuffle, walking from the back.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i as u64 + 1) as usize;
            items.swap(i, j);
        }
    }
}
