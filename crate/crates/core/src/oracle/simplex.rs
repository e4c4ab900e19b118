//! Dense phase-one simplex: minimizes the sum of artificial variables with
//! Bland's anti-cycling rule.

/// `A x = b, x >= 0` with `b >= 0`.
#[derive(Debug, Clone)]
pub(crate) struct EqualityLp {
    pub rows: usize,
    pub cols: usize,
    /// Row-major `rows x cols`.
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    /// Column that is a unit vector in this row and may start basic, if any.
    pub initial_basic: Vec<Option<usize>>,
}

const PIVOT_EPS: f64 = 1e-12;

/// Minimum total infeasibility (sum of artificials) of the system.
pub(crate) fn phase_one(lp: &EqualityLp) -> f64 {
    debug_assert!(lp.b.iter().all(|&v| v >= 0.0));
    let m = lp.rows;
    let artificial: Vec<usize> = (0..m).filter(|&r| lp.initial_basic[r].is_none()).collect();
    let n = lp.cols + artificial.len();
    let width = n + 1;

    // Tableau rows followed by the reduced-cost row; last column is the rhs.
    let mut t = vec![0.0; (m + 1) * width];
    let mut basis = vec![0usize; m];
    for r in 0..m {
        t[r * width..r * width + lp.cols].copy_from_slice(&lp.a[r * lp.cols..(r + 1) * lp.cols]);
        t[r * width + n] = lp.b[r];
    }
    for (j, &r) in artificial.iter().enumerate() {
        t[r * width + lp.cols + j] = 1.0;
        basis[r] = lp.cols + j;
    }
    for (slot, init) in basis.iter_mut().zip(&lp.initial_basic) {
        if let Some(c) = *init {
            *slot = c;
        }
    }
    // Objective: minimize sum of artificials => reduced costs are minus the
    // sum of the artificial rows over non-artificial columns.
    let obj = m * width;
    for &r in &artificial {
        for c in 0..width {
            if c < lp.cols || c == n {
                t[obj + c] -= t[r * width + c];
            }
        }
    }

    let max_pivots = 50 * (m + n);
    for _ in 0..max_pivots {
        // Bland: lowest-index column with negative reduced cost.
        let Some(enter) = (0..n).find(|&c| t[obj + c] < -1e-11) else {
            break;
        };
        let mut leave: Option<(usize, f64)> = None;
        for r in 0..m {
            let coef = t[r * width + enter];
            if coef > PIVOT_EPS {
                let ratio = t[r * width + n] / coef;
                let better = match leave {
                    None => true,
                    Some((lr, best)) => {
                        ratio < best - 1e-12
                            || ((ratio - best).abs() <= 1e-12 && basis[r] < basis[lr])
                    }
                };
                if better {
                    leave = Some((r, ratio));
                }
            }
        }
        let Some((pr, _)) = leave else {
            // Unbounded direction; cannot happen for a phase-one objective
            // bounded below by zero.
            break;
        };
        let pivot = t[pr * width + enter];
        for c in 0..width {
            t[pr * width + c] /= pivot;
        }
        for r in 0..=m {
            if r == pr {
                continue;
            }
            let factor = t[r * width + enter];
            if factor != 0.0 {
                for c in 0..width {
                    t[r * width + c] -= factor * t[pr * width + c];
                }
            }
        }
        basis[pr] = enter;
    }
    -t[obj + n]
}
