use serde::{Deserialize, Serialize};

use super::{inf_norm, Control, IterationState, Minimizer, Objective, OptimizeResult, Termination};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GradientDescentConfig {
    pub learning_rate: f64,
    pub max_iterations: usize,
    pub grad_tolerance: f64,
}

impl Default for GradientDescentConfig {
    fn default() -> Self {
        GradientDescentConfig {
            learning_rate: 0.1,
            max_iterations: 2000,
            grad_tolerance: 1e-7,
        }
    }
}

/// Fixed-step gradient descent. Reports the best iterate seen.
#[derive(Debug, Clone, Copy, Default)]
pub struct GradientDescent {
    pub config: GradientDescentConfig,
}

impl GradientDescent {
    pub fn new(config: GradientDescentConfig) -> Self {
        GradientDescent { config }
    }
}

impl Minimizer for GradientDescent {
    fn minimize_with(
        &self,
        objective: &mut dyn Objective,
        x0: Vec<f64>,
        observer: &mut dyn FnMut(&IterationState<'_>) -> Control,
    ) -> OptimizeResult {
        let cfg = &self.config;
        let mut x = x0;
        let mut grad = vec![0.0; x.len()];
        let mut f = objective.evaluate(&x, &mut grad);
        let initial_loss = f;
        let mut best = (x.clone(), f);
        let mut termination = Termination::MaxIter;
        let mut iterations = 0;

        if !f.is_finite() {
            termination = Termination::NonFinite;
        } else {
            for it in 0..=cfg.max_iterations {
                iterations = it;
                let gnorm = inf_norm(&grad);
                if f < best.1 {
                    best = (x.clone(), f);
                }
                let state = IterationState {
                    iteration: it,
                    x: &x,
                    loss: f,
                    grad_inf_norm: gnorm,
                };
                if observer(&state) == Control::Stop {
                    best = (x.clone(), f);
                    termination = Termination::Stopped;
                    break;
                }
                if gnorm <= cfg.grad_tolerance {
                    termination = Termination::GradTol;
                    break;
                }
                if it == cfg.max_iterations {
                    break;
                }
                x.iter_mut()
                    .zip(&grad)
                    .for_each(|(xi, gi)| *xi -= cfg.learning_rate * gi);
                f = objective.evaluate(&x, &mut grad);
                if !f.is_finite() {
                    termination = Termination::NonFinite;
                    break;
                }
            }
        }

        OptimizeResult {
            final_params: best.0,
            final_loss: best.1,
            initial_loss,
            iterations,
            evaluations: iterations + 1,
            converged: termination == Termination::GradTol,
            termination,
        }
    }
}
