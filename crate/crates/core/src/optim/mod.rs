//! Unconstrained minimizers for smooth objectives.
//!
//! [`Lbfgs`] is the default trainer; [`GradientDescent`] exists for
//! benchmarking alternative training schemes. Both are single-shot: restart
//! policies belong to the caller.

mod gd;
mod lbfgs;
mod line_search;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use gd::{GradientDescent, GradientDescentConfig};
pub use lbfgs::Lbfgs;

/// A differentiable function: returns the value at `x` and writes the
/// gradient into `grad`.
pub trait Objective {
    fn evaluate(&mut self, x: &[f64], grad: &mut [f64]) -> f64;
}

impl<F> Objective for F
where
    F: FnMut(&[f64], &mut [f64]) -> f64,
{
    fn evaluate(&mut self, x: &[f64], grad: &mut [f64]) -> f64 {
        self(x, grad)
    }
}

/// Snapshot handed to an observer after every accepted iterate (and once
/// for the starting point, with `iteration == 0`).
#[derive(Debug, Clone, Copy)]
pub struct IterationState<'a> {
    pub iteration: usize,
    pub x: &'a [f64],
    pub loss: f64,
    pub grad_inf_norm: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Control {
    Continue,
    Stop,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    GradTol,
    LossTol,
    MaxIter,
    LineSearchFailure,
    /// The observer asked to stop.
    Stopped,
    /// The objective was not finite at the starting point.
    NonFinite,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizeResult {
    pub final_params: Vec<f64>,
    pub final_loss: f64,
    pub initial_loss: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
    pub termination: Termination,
}

/// Strong Wolfe line search parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LineSearchConfig {
    pub c1: f64,
    pub c2: f64,
    /// Function evaluations allowed per line search.
    pub max_backtracks: usize,
}

impl Default for LineSearchConfig {
    fn default() -> Self {
        LineSearchConfig {
            c1: 1e-4,
            c2: 0.9,
            max_backtracks: 30,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerConfig {
    /// Number of curvature pairs kept; 0 gives steepest descent.
    pub history_size: usize,
    pub max_iterations: usize,
    /// Stop once the largest gradient component is at most this.
    pub grad_tolerance: f64,
    /// Stop once `(f_prev - f) / max(|f_prev|, |f|, 1)` is at most this.
    pub loss_tolerance: f64,
    pub line_search: LineSearchConfig,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            history_size: 10,
            max_iterations: 500,
            grad_tolerance: 1e-7,
            loss_tolerance: 1e-10,
            line_search: LineSearchConfig::default(),
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        let ls = &self.line_search;
        if !(0.0 < ls.c1 && ls.c1 < ls.c2 && ls.c2 < 1.0) {
            return Err(Error::config(format!(
                "Wolfe parameters need 0 < c1 < c2 < 1, got c1 = {}, c2 = {}",
                ls.c1, ls.c2
            )));
        }
        if self.max_iterations == 0 || ls.max_backtracks == 0 {
            return Err(Error::config(
                "iteration and backtrack budgets must be positive",
            ));
        }
        if !(self.grad_tolerance >= 0.0 && self.loss_tolerance >= 0.0) {
            return Err(Error::config("tolerances must be nonnegative"));
        }
        Ok(())
    }
}

pub trait Minimizer: Send + Sync {
    fn minimize_with(
        &self,
        objective: &mut dyn Objective,
        x0: Vec<f64>,
        observer: &mut dyn FnMut(&IterationState<'_>) -> Control,
    ) -> OptimizeResult;

    fn minimize(&self, objective: &mut dyn Objective, x0: Vec<f64>) -> OptimizeResult {
        self.minimize_with(objective, x0, &mut |_| Control::Continue)
    }
}

/// L-BFGS with the given configuration.
pub fn minimize<O: Objective>(
    mut objective: O,
    x0: Vec<f64>,
    cfg: &OptimizerConfig,
) -> OptimizeResult {
    Lbfgs::new(*cfg).minimize(&mut objective, x0)
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub(crate) fn inf_norm(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}
