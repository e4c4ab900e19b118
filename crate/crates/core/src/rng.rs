//! Counter-based pseudo-random numbers.
//!
//! Word `i` of the stream with key `key` is
//!
//! ```text
//! mix64(mix64(key) + (i + 1) * 0x9E37_79B9_7F4A_7C15)     (wrapping)
//! ```
//!
//! where `mix64` is the SplitMix64 finalizer. Any word can be computed
//! without generating its predecessors, so results never depend on the
//! order in which parallel workers consume streams. Sub-streams are keyed by
//! [`derive_seed`] over a tuple of indices.
//!
//! Normal variates use Box–Muller on word pairs `(2p, 2p + 1)`: variate
//! `2p` is the cosine branch and `2p + 1` the sine branch of pair `p`.

use std::f64::consts::TAU;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;
const TWO_POW_M53: f64 = 1.0 / (1u64 << 53) as f64;

#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Hash an index tuple into a stream key. Order-sensitive.
pub fn derive_seed(parts: &[u64]) -> u64 {
    let mut h = mix64(parts.len() as u64 ^ 0x6A09_E667_F3BC_C909);
    for &p in parts {
        h = mix64(h.wrapping_add(GOLDEN) ^ mix64(p));
    }
    h
}

#[inline]
pub fn word_at(key: u64, index: u64) -> u64 {
    mix64(mix64(key).wrapping_add(index.wrapping_add(1).wrapping_mul(GOLDEN)))
}

/// Uniform in `(0, 1]` from the top 53 bits.
#[inline]
fn open_unit(word: u64) -> f64 {
    ((word >> 11) + 1) as f64 * TWO_POW_M53
}

/// Uniform in `[0, 1)` from the top 53 bits.
#[inline]
fn half_open_unit(word: u64) -> f64 {
    (word >> 11) as f64 * TWO_POW_M53
}

/// Standard normal variate number `index` of stream `key`.
pub fn normal_at(key: u64, index: u64) -> f64 {
    let pair = index / 2;
    let u1 = open_unit(word_at(key, 2 * pair));
    let u2 = half_open_unit(word_at(key, 2 * pair + 1));
    let r = (-2.0 * u1.ln()).sqrt();
    let theta = TAU * u2;
    if index.is_multiple_of(2) {
        r * theta.cos()
    } else {
        r * theta.sin()
    }
}

/// Sequential view over one counter-based stream.
#[derive(Debug, Clone)]
pub struct CounterRng {
    key: u64,
    counter: u64,
}

impl CounterRng {
    pub fn new(key: u64) -> Self {
        CounterRng { key, counter: 0 }
    }

    pub fn from_parts(parts: &[u64]) -> Self {
        Self::new(derive_seed(parts))
    }

    pub fn key(&self) -> u64 {
        self.key
    }

    pub fn next_u64(&mut self) -> u64 {
        let w = word_at(self.key, self.counter);
        self.counter += 1;
        w
    }

    /// Uniform in `[0, 1)`.
    pub fn next_f64(&mut self) -> f64 {
        half_open_unit(self.next_u64())
    }

    /// Uniform in `[lo, hi)`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Uniform integer in `[0, bound)` by Lemire's multiply-shift with
    /// rejection, so the result is exactly uniform.
    pub fn below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0, "bound must be positive");
        let threshold = bound.wrapping_neg() % bound;
        loop {
            let m = self.next_u64() as u128 * bound as u128;
            if (m as u64) >= threshold {
                return (m >> 64) as u64;
            }
        }
    }

    /// Standard normal variate; consumes one Box–Muller pair.
    pub fn next_normal(&mut self) -> f64 {
        let u1 = open_unit(self.next_u64());
        let u2 = half_open_unit(self.next_u64());
        (-2.0 * u1.ln()).sqrt() * (TAU * u2).cos()
    }
}
