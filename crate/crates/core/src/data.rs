//! Point sets in random position.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::rng::normal_at;

/// `n` points in `k` dimensions, row-major, drawn i.i.d. from the standard
/// normal distribution.
///
/// Coordinate `j` of point `i` is variate `i * k + j` of the counter stream
/// keyed by `seed` (see [`crate::rng`]), so `generate(n, k, s)` is a prefix
/// of `generate(m, k, s)` for every `m >= n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Dataset {
    points: Vec<f64>,
    n: usize,
    k: usize,
    seed: u64,
}

impl Dataset {
    pub fn generate(n: usize, k: usize, seed: u64) -> Result<Self> {
        if n == 0 || k == 0 {
            return Err(Error::domain(format!(
                "datasets need n >= 1 and k >= 1, got n = {n}, k = {k}"
            )));
        }
        let points = (0..(n * k) as u64).map(|i| normal_at(seed, i)).collect();
        Ok(Dataset { points, n, k, seed })
    }

    /// Wrap explicit coordinates (row-major, `k` per point).
    pub fn from_points(points: Vec<f64>, k: usize) -> Result<Self> {
        if k == 0 || points.is_empty() || !points.len().is_multiple_of(k) {
            return Err(Error::domain(format!(
                "{} coordinates do not form points of dimension {k}",
                points.len()
            )));
        }
        let n = points.len() / k;
        Ok(Dataset {
            points,
            n,
            k,
            seed: 0,
        })
    }

    /// The first `n` points, keeping the seed.
    pub fn prefix(&self, n: usize) -> Result<Self> {
        if n == 0 || n > self.n {
            return Err(Error::domain(format!(
                "prefix of length {n} from a dataset of {} points",
                self.n
            )));
        }
        Ok(Dataset {
            points: self.points[..n * self.k].to_vec(),
            n,
            k: self.k,
            seed: self.seed,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.k..(i + 1) * self.k]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.points.chunks_exact(self.k)
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.points
    }
}
