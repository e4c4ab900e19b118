//! Strong Wolfe line search: bracketing followed by zoom with safeguarded
//! cubic interpolation.

use super::{dot, LineSearchConfig, Objective};

#[derive(Debug, Clone)]
pub(crate) struct Probe {
    pub alpha: f64,
    pub f: f64,
    /// Directional derivative at `alpha`.
    pub slope: f64,
    pub x: Vec<f64>,
    pub grad: Vec<f64>,
}

pub(crate) enum Outcome {
    Accepted(Probe),
    /// No strong Wolfe point within budget. `best` is the lowest probe that
    /// satisfied sufficient decrease, if any.
    Failed {
        best: Option<Probe>,
    },
}

pub(crate) struct Search<'a> {
    pub objective: &'a mut dyn Objective,
    pub x: &'a [f64],
    pub f0: f64,
    pub slope0: f64,
    pub direction: &'a [f64],
    pub cfg: LineSearchConfig,
    pub evaluations: usize,
}

impl Search<'_> {
    fn probe(&mut self, alpha: f64) -> Probe {
        let x: Vec<f64> = self
            .x
            .iter()
            .zip(self.direction)
            .map(|(xi, di)| xi + alpha * di)
            .collect();
        let mut grad = vec![0.0; x.len()];
        let f = self.objective.evaluate(&x, &mut grad);
        self.evaluations += 1;
        let slope = dot(&grad, self.direction);
        Probe {
            alpha,
            f,
            slope,
            x,
            grad,
        }
    }

    fn armijo(&self, p: &Probe) -> bool {
        p.f.is_finite()
            && p.slope.is_finite()
            && p.f <= self.f0 + self.cfg.c1 * p.alpha * self.slope0
    }

    fn curvature(&self, p: &Probe) -> bool {
        p.slope.abs() <= -self.cfg.c2 * self.slope0
    }

    pub fn run(mut self, alpha0: f64) -> (Outcome, usize) {
        debug_assert!(self.slope0 < 0.0);
        let budget = self.cfg.max_backtracks;
        let mut prev: Option<Probe> = None;
        let mut alpha = alpha0;
        while self.evaluations < budget {
            let cur = self.probe(alpha);
            let prev_f = prev.as_ref().map_or(self.f0, |p| p.f);
            if !self.armijo(&cur) || (prev.is_some() && cur.f >= prev_f) {
                return self.zoom(prev, cur);
            }
            if self.curvature(&cur) {
                return (Outcome::Accepted(cur), self.evaluations);
            }
            if cur.slope >= 0.0 {
                return self.zoom(Some(cur), prev.unwrap_or_else(|| self.origin()));
            }
            alpha = cur.alpha * 2.0;
            prev = Some(cur);
        }
        let evals = self.evaluations;
        (Outcome::Failed { best: prev }, evals)
    }

    /// The starting point as a probe at `alpha = 0`; its vectors are never
    /// read back as an iterate.
    fn origin(&self) -> Probe {
        Probe {
            alpha: 0.0,
            f: self.f0,
            slope: self.slope0,
            x: Vec::new(),
            grad: Vec::new(),
        }
    }

    /// `lo` satisfies sufficient decrease and has the lowest value seen so
    /// far (`None` stands for the starting point); the minimizer lies
    /// between `lo` and `hi`.
    fn zoom(&mut self, lo: Option<Probe>, hi: Probe) -> (Outcome, usize) {
        let mut lo = lo.unwrap_or_else(|| self.origin());
        let mut hi = hi;
        while self.evaluations < self.cfg.max_backtracks {
            let width = (hi.alpha - lo.alpha).abs();
            if width <= f64::EPSILON * lo.alpha.abs().max(hi.alpha.abs()) {
                break;
            }
            let alpha = interpolate(&lo, &hi);
            let cur = self.probe(alpha);
            if !self.armijo(&cur) || cur.f >= lo.f {
                hi = cur;
            } else {
                if self.curvature(&cur) {
                    return (Outcome::Accepted(cur), self.evaluations);
                }
                if cur.slope * (hi.alpha - lo.alpha) >= 0.0 {
                    hi = std::mem::replace(&mut lo, cur);
                } else {
                    lo = cur;
                }
            }
        }
        let best = (lo.alpha > 0.0).then_some(lo);
        (Outcome::Failed { best }, self.evaluations)
    }
}

/// Minimizer of the cubic matching values and slopes at both ends, kept at
/// least 10% of the interval away from either end; bisection when the cubic
/// is unusable.
fn interpolate(a: &Probe, b: &Probe) -> f64 {
    let (lo, hi) = if a.alpha < b.alpha { (a, b) } else { (b, a) };
    let width = hi.alpha - lo.alpha;
    let mid = lo.alpha + 0.5 * width;
    if !(a.f.is_finite() && b.f.is_finite() && a.slope.is_finite() && b.slope.is_finite()) {
        return mid;
    }
    let d1 = a.slope + b.slope - 3.0 * (a.f - b.f) / (a.alpha - b.alpha);
    let disc = d1 * d1 - a.slope * b.slope;
    if disc < 0.0 {
        return mid;
    }
    let d2 = (b.alpha - a.alpha).signum() * disc.sqrt();
    let denom = b.slope - a.slope + 2.0 * d2;
    if denom == 0.0 {
        return mid;
    }
    let t = b.alpha - (b.alpha - a.alpha) * (b.slope + d2 - d1) / denom;
    if !t.is_finite() {
        return mid;
    }
    t.clamp(lo.alpha + 0.1 * width, hi.alpha - 0.1 * width)
}
