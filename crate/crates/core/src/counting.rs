//! Counting threshold functions.
//!
//! `T(n, k)` is the number of labelings of `n` points in general position
//! that a threshold unit with `k` free weights can realize (Schläfli/Cover).
//! Values are exact: the count overflows 64 bits around `n = 70`.

use std::cell::RefCell;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use serde::Serialize;

use crate::error::{Error, Result};

/// Largest `n` (and `k`) accepted by the counting functions.
pub const MAX_SUPPORTED: u64 = 10_000;

/// Memo tables larger than this many cells are not built; the closed form
/// is used instead.
pub const MEMO_CELL_CAP: usize = 1 << 18;

/// Exact nonnegative integer.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BigCount(BigUint);

impl BigCount {
    pub fn new(value: BigUint) -> Self {
        BigCount(value)
    }

    pub fn pow2(exp: u64) -> Self {
        BigCount(BigUint::one() << exp)
    }

    pub fn value(&self) -> &BigUint {
        &self.0
    }

    pub fn into_inner(self) -> BigUint {
        self.0
    }

    pub fn to_u64(&self) -> Option<u64> {
        self.0.to_u64()
    }

    pub fn is_even(&self) -> bool {
        !self.0.bit(0)
    }
}

impl From<u64> for BigCount {
    fn from(v: u64) -> Self {
        BigCount(BigUint::from(v))
    }
}

impl fmt::Display for BigCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

/// One point of a characteristic curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvePoint {
    pub n: u64,
    pub k: u64,
    /// `n / k`.
    pub x: f64,
    /// Share of the `2^n` labelings that are realizable.
    pub fraction: f64,
}

fn check_domain(n: u64, k: u64) -> Result<()> {
    if n < 1 || k < 1 {
        return Err(Error::domain(format!(
            "T(n, k) requires n >= 1 and k >= 1, got n = {n}, k = {k}"
        )));
    }
    if n > MAX_SUPPORTED || k > MAX_SUPPORTED {
        return Err(Error::domain(format!(
            "T(n, k) is supported for n, k <= {MAX_SUPPORTED}, got n = {n}, k = {k}"
        )));
    }
    Ok(())
}

/// Row-major table of `T(n, k)` for `n` in `1..=rows`, `k` in `1..=cols`,
/// filled with the Pascal-type recurrence.
#[derive(Debug, Default)]
struct RecurrenceTable {
    cols: usize,
    rows: Vec<Vec<BigUint>>,
}

impl RecurrenceTable {
    fn get(&mut self, n: usize, k: usize) -> BigUint {
        if k > self.cols {
            // Widening invalidates every row; rebuild from scratch.
            self.cols = k;
            self.rows.clear();
        }
        while self.rows.len() < n {
            let next = match self.rows.last() {
                None => vec![BigUint::from(2u32); self.cols],
                Some(prev) => {
                    let mut row = Vec::with_capacity(self.cols);
                    row.push(BigUint::from(2u32));
                    for j in 1..self.cols {
                        row.push(&prev[j] + &prev[j - 1]);
                    }
                    row
                }
            };
            self.rows.push(next);
        }
        self.rows[n - 1][k - 1].clone()
    }

    fn cells_after(&self, n: usize, k: usize) -> usize {
        n.max(self.rows.len()).saturating_mul(k.max(self.cols))
    }
}

thread_local! {
    static TABLE: RefCell<RecurrenceTable> = RefCell::new(RecurrenceTable::default());
}

/// `T(n, k)` via `T(n, k) = T(n-1, k) + T(n-1, k-1)` with
/// `T(n, 1) = T(1, k) = 2`.
///
/// Intermediate values are memoized per thread. Requests whose table would
/// exceed [`MEMO_CELL_CAP`] cells are answered by [`tnk_closed`].
pub fn tnk_recursive(n: u64, k: u64) -> Result<BigCount> {
    check_domain(n, k)?;
    let (n, k) = (n as usize, k as usize);
    let value = TABLE.with(|t| {
        let mut table = t.borrow_mut();
        if table.cells_after(n, k) > MEMO_CELL_CAP {
            None
        } else {
            Some(table.get(n, k))
        }
    });
    match value {
        Some(v) => Ok(BigCount(v)),
        None => tnk_closed(n as u64, k as u64),
    }
}

/// `T(n, k) = 2 * sum_{l=0}^{k-1} C(n-1, l)`, which equals `2^n` once
/// `k >= n`.
pub fn tnk_closed(n: u64, k: u64) -> Result<BigCount> {
    check_domain(n, k)?;
    if k >= n {
        return Ok(BigCount::pow2(n));
    }
    let m = n - 1;
    let mut binom = BigUint::one();
    let mut sum = BigUint::one();
    for l in 0..k - 1 {
        binom = binom * BigUint::from(m - l) / BigUint::from(l + 1);
        sum += &binom;
    }
    Ok(BigCount(sum << 1u32))
}

/// Exact `count / 2^n`, rounded once to the nearest double.
pub fn labeling_fraction(count: &BigCount, n: u64) -> f64 {
    let ratio = BigRational::new(
        BigInt::from(count.0.clone()),
        BigInt::from(BigUint::one() << n),
    );
    ratio.to_f64().unwrap_or(0.0)
}

/// The normalized characteristic curve of an ideal threshold unit with `k`
/// weights, for `n = 1..=n_max`.
pub fn theoretical_curve(k: u64, n_max: u64) -> Result<Vec<CurvePoint>> {
    check_domain(n_max, k)?;
    (1..=n_max)
        .map(|n| {
            let t = tnk_recursive(n, k)?;
            Ok(CurvePoint {
                n,
                k,
                x: n as f64 / k as f64,
                fraction: labeling_fraction(&t, n),
            })
        })
        .collect()
}

/// `(vc, mk) = (k, 2k)`: the last sample count with complete shattering and
/// the point where exactly half the labelings remain realizable.
pub fn ideal_points(k: u64) -> Result<(u64, u64)> {
    if k < 1 || 2 * k > MAX_SUPPORTED {
        return Err(Error::domain(format!(
            "ideal points need 1 <= k <= {}, got {k}",
            MAX_SUPPORTED / 2
        )));
    }
    let mk = 2 * k;
    let half = tnk_closed(mk, k)?;
    assert_eq!(
        half.0 << 1u32,
        BigUint::one() << mk,
        "T(2k, k) must be 2^(2k-1)"
    );
    Ok((k, mk))
}
