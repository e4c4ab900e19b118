//! Labelings of `n` points with the first label fixed to class 0.
//!
//! Complementing every label complements the classifier's output, so
//! labelings whose first point is class 1 add no information. A labeling
//! is identified by a code `c < 2^(n-1)`: point 0 is class 0 and point
//! `j >= 1` takes bit `n - 1 - j` of `c`, so the label string read left to
//! right is `c` written with `n` binary digits.

use crate::rng::word_at;

/// Largest sample count a labeling code can address.
pub const MAX_LABELED_POINTS: usize = 128;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LabelingStream {
    n: usize,
    exhaustive: bool,
    len: u64,
    seed: u64,
}

/// All `2^(n-1)` labelings in ascending code order when
/// `n - 1 <= max_exhaustive_bits`; otherwise `2^max_exhaustive_bits` codes
/// drawn uniformly (with replacement) from the counter stream `seed`.
pub fn labeling_stream(n: usize, max_exhaustive_bits: u32, seed: u64) -> LabelingStream {
    assert!(
        (1..=MAX_LABELED_POINTS).contains(&n),
        "labelings are supported for 1 <= n <= {MAX_LABELED_POINTS}"
    );
    let free_bits = (n - 1) as u32;
    let exhaustive = free_bits <= max_exhaustive_bits;
    let len = 1u64
        << if exhaustive {
            free_bits
        } else {
            max_exhaustive_bits
        };
    LabelingStream {
        n,
        exhaustive,
        len,
        seed,
    }
}

impl LabelingStream {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_exhaustive(&self) -> bool {
        self.exhaustive
    }

    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Code of labeling `index`; random access in both modes.
    pub fn code(&self, index: u64) -> u128 {
        debug_assert!(index < self.len);
        if self.exhaustive {
            return index as u128;
        }
        let hi = word_at(self.seed, 2 * index) as u128;
        let lo = word_at(self.seed, 2 * index + 1) as u128;
        let word = (hi << 64) | lo;
        let free_bits = self.n - 1;
        if free_bits >= 128 {
            word
        } else {
            word & ((1u128 << free_bits) - 1)
        }
    }

    pub fn labels(&self, index: u64) -> Vec<bool> {
        labels_from_code(self.code(index), self.n)
    }

    pub fn iter(&self) -> impl Iterator<Item = Vec<bool>> + '_ {
        (0..self.len).map(move |i| self.labels(i))
    }
}

pub fn labels_from_code(code: u128, n: usize) -> Vec<bool> {
    (0..n)
        .map(|j| j > 0 && (code >> (n - 1 - j)) & 1 == 1)
        .collect()
}
