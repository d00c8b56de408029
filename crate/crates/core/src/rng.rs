//! Counter-based random number streams.
//!
//! Every Monte Carlo sample draws from its own ChaCha substream keyed by
//! (seed, label, sample index), so parallel batches are reproducible and
//! aggregation order does not matter.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::num::Float;

#[derive(Clone, Copy, Debug)]
pub struct Streams {
    pub seed: u64,
    pub label: u64,
}

impl Streams {
    pub fn new(seed: u64, name: &str) -> Self {
        Self { seed, label: fnv1a(name) }
    }

    /// Derive a child family of streams (e.g. one per test case).
    pub fn child(&self, name: &str) -> Self {
        Self { seed: self.seed, label: self.label.wrapping_mul(0x100000001b3) ^ fnv1a(name) }
    }

    /// Independent generator for sample `index`.
    pub fn rng(&self, index: u64) -> ChaCha8Rng {
        let mut r = ChaCha8Rng::seed_from_u64(
            self.seed ^ self.label.wrapping_mul(0x9e3779b97f4a7c15),
        );
        r.set_stream(index);
        r
    }
}

pub fn fnv1a(s: &str) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for b in s.as_bytes() {
        h ^= *b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

/// Uniform draw in [0, 1).
pub fn uniform<F: Float, R: Rng>(rng: &mut R) -> F {
    F::of(rng.random::<f64>())
}

/// Draw from the density (1/2) sin(theta) on (0, pi).
pub fn sample_sin_theta<F: Float, R: Rng>(rng: &mut R) -> F {
    let u: F = uniform(rng);
    (F::one() - F::of(2.0) * u).acos()
}
