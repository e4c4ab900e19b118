//! Ground truth for linear separability.
//!
//! A labeling `y` of points `x_i` is linearly separable iff the linear
//! program
//!
//! ```text
//! y_i (w . x_i - b) >= 1   for all i,     |w_j|, |b| <= 1e6
//! ```
//!
//! is feasible (labels mapped to `{-1, +1}`; `b = 0` in the homogeneous
//! case). Any strictly separating hyperplane can be rescaled to margin 1, so
//! the margin form is exact for finite point sets.

mod simplex;

use nalgebra::DMatrix;
use rayon::prelude::*;
use subsets::Combinations;

use crate::counting::BigCount;
use crate::data::Dataset;
use crate::error::{Error, Result};
use simplex::{phase_one, EqualityLp};

/// Largest point count [`count_separable`] will enumerate.
pub const MAX_ENUMERATION_POINTS: usize = 22;

/// Box bound on every weight and the bias.
pub const WEIGHT_BOX: f64 = 1e6;

/// Phase-one optimum at or below this is feasible.
const FEASIBLE_TOL: f64 = 1e-9;
/// Optima strictly between the two tolerances are ambiguous.
const INFEASIBLE_TOL: f64 = 1e-6;

/// Relative singular-value cutoff for rank decisions.
pub const RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy)]
pub struct SeparabilityQuery<'a> {
    pub points: &'a Dataset,
    pub labels: &'a [bool],
    /// Hyperplane through the origin (no bias).
    pub homogeneous: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Separability {
    pub separable: bool,
    /// The first solve was numerically ambiguous and the answer comes from a
    /// re-solve with a perturbed margin.
    pub degenerate: bool,
}

fn margin_lp(q: &SeparabilityQuery<'_>, margin: f64) -> EqualityLp {
    let n = q.points.n();
    let d = q.points.k();
    let free = if q.homogeneous { d } else { d + 1 };
    // Columns: [v+ (free) | v- (free) | surplus (n) | box slack (2 free)].
    let cols = 2 * free + n + 2 * free;
    let rows = n + 2 * free;
    let mut a = vec![0.0; rows * cols];
    let mut b = vec![0.0; rows];
    let mut initial_basic = vec![None; rows];

    for (i, (x, &label)) in q.points.points().zip(q.labels).enumerate() {
        let y = if label { 1.0 } else { -1.0 };
        let row = &mut a[i * cols..(i + 1) * cols];
        for j in 0..d {
            row[j] = y * x[j];
            row[free + j] = -y * x[j];
        }
        if !q.homogeneous {
            row[d] = -y;
            row[free + d] = y;
        }
        row[2 * free + i] = -1.0;
        b[i] = margin;
    }
    for v in 0..2 * free {
        let r = n + v;
        let slack = 2 * free + n + v;
        a[r * cols + v] = 1.0;
        a[r * cols + slack] = 1.0;
        b[r] = WEIGHT_BOX;
        initial_basic[r] = Some(slack);
    }
    EqualityLp {
        rows,
        cols,
        a,
        b,
        initial_basic,
    }
}

fn validate(q: &SeparabilityQuery<'_>) -> Result<()> {
    if q.labels.len() != q.points.n() {
        return Err(Error::Shape {
            expected: q.points.n(),
            actual: q.labels.len(),
        });
    }
    Ok(())
}

/// Decide separability, flagging numerically ambiguous solves.
pub fn separability(q: &SeparabilityQuery<'_>) -> Result<Separability> {
    validate(q)?;
    let infeasibility = phase_one(&margin_lp(q, 1.0));
    if infeasibility <= FEASIBLE_TOL {
        return Ok(Separability {
            separable: true,
            degenerate: false,
        });
    }
    if infeasibility >= INFEASIBLE_TOL {
        return Ok(Separability {
            separable: false,
            degenerate: false,
        });
    }
    let margin = 2.0;
    let again = phase_one(&margin_lp(q, margin)) / margin;
    Ok(Separability {
        separable: again < (FEASIBLE_TOL * INFEASIBLE_TOL).sqrt(),
        degenerate: true,
    })
}

pub fn is_separable(q: &SeparabilityQuery<'_>) -> Result<bool> {
    separability(q).map(|s| s.separable)
}

/// Labeling number `code`: point `i` gets bit `i` of `code`.
fn labels_from_code(code: u64, n: usize) -> Vec<bool> {
    (0..n).map(|i| code >> i & 1 == 1).collect()
}

/// Number of the `2^n` labelings of `points` that are linearly separable.
///
/// For points in general position this equals `T(n, d)` (homogeneous) or
/// `T(n, d + 1)` (affine) for points in `d` dimensions.
pub fn count_separable(points: &Dataset, homogeneous: bool) -> Result<BigCount> {
    let n = points.n();
    if n > MAX_ENUMERATION_POINTS {
        return Err(Error::Budget(format!(
            "enumerating 2^{n} labelings exceeds the limit of 2^{MAX_ENUMERATION_POINTS}"
        )));
    }
    let count = (0..1u64 << n)
        .into_par_iter()
        .map(|code| {
            let labels = labels_from_code(code, n);
            let q = SeparabilityQuery {
                points,
                labels: &labels,
                homogeneous,
            };
            u64::from(is_separable(&q).expect("labels sized to the point set"))
        })
        .sum::<u64>();
    Ok(BigCount::from(count))
}

fn rank(rows: &[&[f64]], dim: usize) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let m = DMatrix::from_fn(rows.len(), dim, |r, c| rows[r][c]);
    let sv = m.singular_values();
    let max = sv.max();
    if max == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > RANK_TOL * max).count()
}

/// Rank of the differences `x_i - x_0`; `n - 1` means affinely independent.
pub fn affine_rank(points: &Dataset) -> usize {
    let base = points.point(0);
    let diffs: Vec<Vec<f64>> = points
        .points()
        .skip(1)
        .map(|p| p.iter().zip(base).map(|(a, b)| a - b).collect())
        .collect();
    let refs: Vec<&[f64]> = diffs.iter().map(Vec::as_slice).collect();
    rank(&refs, points.k())
}

/// Every subset of at most `d` points is linearly independent and no `d + 1`
/// points lie on a common `(d - 1)`-dimensional affine plane.
pub fn check_general_position(points: &Dataset) -> bool {
    let n = points.n();
    let d = points.k();
    let size = n.min(d);
    let linear_ok = Combinations::new(n, size).all(|idx| {
        let rows: Vec<&[f64]> = idx.iter().map(|&i| points.point(i)).collect();
        rank(&rows, d) == size
    });
    if !linear_ok {
        return false;
    }
    if n < d + 1 {
        return true;
    }
    Combinations::new(n, d + 1).all(|idx| {
        let base = points.point(idx[0]);
        let diffs: Vec<Vec<f64>> = idx[1..]
            .iter()
            .map(|&i| {
                points
                    .point(i)
                    .iter()
                    .zip(base)
                    .map(|(a, b)| a - b)
                    .collect()
            })
            .collect();
        let rows: Vec<&[f64]> = diffs.iter().map(Vec::as_slice).collect();
        rank(&rows, d) == d
    })
}

mod subsets {
    /// Lexicographic `r`-subsets of `0..n`.
    pub struct Combinations {
        n: usize,
        idx: Vec<usize>,
        done: bool,
    }

    impl Combinations {
        pub fn new(n: usize, r: usize) -> Self {
            Combinations {
                n,
                idx: (0..r).collect(),
                done: r > n,
            }
        }
    }

    impl Iterator for Combinations {
        type Item = Vec<usize>;

        fn next(&mut self) -> Option<Vec<usize>> {
            if self.done {
                return None;
            }
            let out = self.idx.clone();
            let r = self.idx.len();
            let mut i = r;
            loop {
                if i == 0 {
                    self.done = true;
                    break;
                }
                i -= 1;
                if self.idx[i] < self.n - r + i {
                    self.idx[i] += 1;
                    for j in i + 1..r {
                        self.idx[j] = self.idx[j - 1] + 1;
                    }
                    break;
                }
            }
            Some(out)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::counting::tnk_closed;
    use crate::rng::CounterRng;
    use proptest::prelude::*;

    fn pts(coords: &[f64], k: usize) -> Dataset {
        Dataset::from_points(coords.to_vec(), k).unwrap()
    }

    fn sep(points: &Dataset, labels: &[bool], homogeneous: bool) -> bool {
        is_separable(&SeparabilityQuery {
            points,
            labels,
            homogeneous,
        })
        .unwrap()
    }

    #[test]
    fn combinations_enumerate() {
        let all: Vec<_> = Combinations::new(4, 2).collect();
        assert_eq!(all.len(), 6);
        assert_eq!(all[0], vec![0, 1]);
        assert_eq!(all[5], vec![2, 3]);
        assert_eq!(Combinations::new(3, 0).count(), 1);
        assert_eq!(Combinations::new(2, 3).count(), 0);
    }

    #[test]
    fn two_points_always_separable() {
        for k in 1..=3 {
            let d = Dataset::generate(2, k, 4).unwrap();
            for code in 0..4 {
                assert!(sep(&d, &labels_from_code(code, 2), false));
            }
        }
    }

    #[test]
    fn xor_is_not_separable() {
        let square = pts(&[0.0, 0.0, 1.0, 0.0, 1.0, 1.0, 0.0, 1.0], 2);
        assert!(!sep(&square, &[false, true, false, true], false));
        assert!(!sep(&square, &[true, false, true, false], false));
        assert!(sep(&square, &[false, false, true, true], false));
    }

    #[test]
    fn constant_labelings_are_separable() {
        let d = Dataset::generate(9, 2, 1).unwrap();
        assert!(sep(&d, &[true; 9], false));
        assert!(sep(&d, &[false; 9], false));
    }

    #[test]
    fn homogeneous_needs_origin_side() {
        // Points on both sides of the origin along one line: a hyperplane
        // through the origin cannot put 1 and 2 in different classes.
        let d = pts(&[1.0, 2.0], 1);
        assert!(!sep(&d, &[true, false], true));
        assert!(sep(&d, &[true, false], false));
    }

    #[test]
    fn count_examples() {
        let d = Dataset::generate(6, 3, 0).unwrap();
        assert_eq!(count_separable(&d, true).unwrap(), BigCount::from(32));
        let d = Dataset::generate(4, 2, 0).unwrap();
        assert_eq!(count_separable(&d, false).unwrap(), BigCount::from(14));
        let d = Dataset::generate(3, 2, 5).unwrap();
        assert_eq!(count_separable(&d, false).unwrap(), BigCount::from(8));
    }

    #[test]
    fn count_budget() {
        let d = Dataset::generate(MAX_ENUMERATION_POINTS + 1, 1, 0).unwrap();
        assert!(matches!(count_separable(&d, false), Err(Error::Budget(_))));
    }

    #[test]
    fn oracle_matches_formula() {
        for seed in 0..20 {
            for k in 2..=3u64 {
                for n in k..=2 * k + 2 {
                    let d = Dataset::generate(n as usize, k as usize, seed).unwrap();
                    assert_eq!(
                        count_separable(&d, true).unwrap(),
                        tnk_closed(n, k).unwrap(),
                        "homogeneous n={n} k={k} seed={seed}"
                    );
                    assert_eq!(
                        count_separable(&d, false).unwrap(),
                        tnk_closed(n, k + 1).unwrap(),
                        "affine n={n} k={k} seed={seed}"
                    );
                }
            }
        }
    }

    #[test]
    fn general_position_checks() {
        let collinear = pts(&[0.0, 1.0, 1.0, 2.0, 2.0, 3.0], 2);
        assert!(!check_general_position(&collinear));
        for seed in 0..10 {
            assert!(check_general_position(
                &Dataset::generate(8, 3, seed).unwrap()
            ));
        }
        // Jittered 3x3 grid shifted off the origin.
        let mut r = CounterRng::new(3);
        let mut grid = Vec::new();
        for i in 0..3 {
            for j in 0..3 {
                grid.push(1.0 + i as f64 + r.uniform(-0.05, 0.05));
                grid.push(1.5 + j as f64 + r.uniform(-0.05, 0.05));
            }
        }
        assert!(check_general_position(&pts(&grid, 2)));
        // The exact grid is not.
        let exact: Vec<f64> = (0..9)
            .flat_map(|c| [1.0 + (c / 3) as f64, 1.5 + (c % 3) as f64])
            .collect();
        assert!(!check_general_position(&pts(&exact, 2)));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn complement_closure(seed in any::<u64>(), n in 1usize..8, k in 1usize..4, code in any::<u64>(), homogeneous in any::<bool>()) {
            let d = Dataset::generate(n, k, seed).unwrap();
            let labels = labels_from_code(code, n);
            let flipped: Vec<bool> = labels.iter().map(|b| !b).collect();
            prop_assert_eq!(sep(&d, &labels, homogeneous), sep(&d, &flipped, homogeneous));
        }

        #[test]
        fn restriction_preserves_separability(seed in any::<u64>(), n in 2usize..9, k in 1usize..4, code in any::<u64>()) {
            let d = Dataset::generate(n, k, seed).unwrap();
            let labels = labels_from_code(code, n);
            if sep(&d, &labels, false) {
                let smaller = d.prefix(n - 1).unwrap();
                prop_assert!(sep(&smaller, &labels[..n - 1], false));
            }
        }

        #[test]
        fn counts_are_even(seed in any::<u64>(), n in 1usize..8, k in 1usize..4) {
            let d = Dataset::generate(n, k, seed).unwrap();
            prop_assert!(count_separable(&d, false).unwrap().is_even());
        }
    }
}
