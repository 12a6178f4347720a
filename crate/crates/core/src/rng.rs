//! Counter-based random numbers.
//!
//! Every draw is a pure function of an integer key, so a value can be
//! recomputed at any time, in any order, on any thread. Keys are mixed
//! with the SplitMix64 finalizer; normals use Box-Muller on two
//! independent uniforms derived from the same key.

use core::f64::consts::PI;

use num_traits::Float;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Hash of a key tuple.
#[inline]
pub fn hash(words: &[u64]) -> u64 {
    let mut h = GOLDEN;
    for &w in words {
        h = mix64(h ^ w.wrapping_add(GOLDEN).wrapping_add(h << 6));
    }
    h
}

/// Uniform on the open interval (0, 1).
#[inline]
pub fn uniform_from(h: u64) -> f64 {
    ((h >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

/// Standard normal keyed by `(a, b, c, d)`.
#[inline]
pub fn normal(a: u64, b: u64, c: u64, d: u64) -> f64 {
    let u1 = uniform_from(hash(&[a, b, c, d, 0]));
    let u2 = uniform_from(hash(&[a, b, c, d, 1]));
    (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
}

/// Sequential stream over a fixed key, for non-path randomness such as
/// random coefficient families.
#[derive(Debug, Clone)]
pub struct Stream {
    seed: u64,
    stream: u64,
    counter: u64,
}

impl Stream {
    pub fn new(seed: u64, stream: u64) -> Self {
        Self { seed, stream, counter: 0 }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.counter += 1;
        hash(&[self.seed, self.stream, self.counter])
    }

    pub fn uniform(&mut self) -> f64 {
        uniform_from(self.next_u64())
    }

    /// Uniform on `[lo, hi)`.
    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    pub fn normal(&mut self) -> f64 {
        self.counter += 1;
        normal(self.seed, self.stream, u64::MAX, self.counter)
    }
}
