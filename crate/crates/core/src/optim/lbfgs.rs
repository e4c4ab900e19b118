use std::collections::VecDeque;

use super::line_search::{Outcome, Search};
use super::{
    dot, inf_norm, Control, IterationState, Minimizer, Objective, OptimizeResult, OptimizerConfig,
    Termination,
};

/// Limited-memory BFGS (two-loop recursion) with a strong Wolfe line search.
///
/// Every search starts from step length 1. Curvature pairs with
/// `s . y <= 0` are dropped. When a line search fails along the quasi-Newton
/// direction the history is discarded and the iteration is retried once
/// along the steepest-descent direction before giving up.
#[derive(Debug, Clone, Copy, Default)]
pub struct Lbfgs {
    pub config: OptimizerConfig,
}

struct Pair {
    s: Vec<f64>,
    y: Vec<f64>,
    rho: f64,
}

impl Lbfgs {
    pub fn new(config: OptimizerConfig) -> Self {
        Lbfgs { config }
    }
}

/// `-H g` for the inverse-Hessian approximation held in `history`.
fn two_loop(grad: &[f64], history: &VecDeque<Pair>) -> Vec<f64> {
    let mut q: Vec<f64> = grad.to_vec();
    let mut alphas = vec![0.0; history.len()];
    for (i, p) in history.iter().enumerate().rev() {
        let a = p.rho * dot(&p.s, &q);
        alphas[i] = a;
        q.iter_mut().zip(&p.y).for_each(|(qi, yi)| *qi -= a * yi);
    }
    let gamma = history
        .back()
        .map_or(1.0, |p| dot(&p.s, &p.y) / dot(&p.y, &p.y));
    q.iter_mut().for_each(|v| *v *= gamma);
    for (i, p) in history.iter().enumerate() {
        let b = p.rho * dot(&p.y, &q);
        let a = alphas[i];
        q.iter_mut()
            .zip(&p.s)
            .for_each(|(qi, si)| *qi += (a - b) * si);
    }
    q.iter_mut().for_each(|v| *v = -*v);
    q
}

impl Minimizer for Lbfgs {
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
        let mut evaluations = 1;
        let initial_loss = f;

        let finish = |x: Vec<f64>,
                      f: f64,
                      iterations: usize,
                      evaluations: usize,
                      termination: Termination| {
            OptimizeResult {
                final_params: x,
                final_loss: f,
                initial_loss,
                iterations,
                evaluations,
                converged: matches!(termination, Termination::GradTol | Termination::LossTol),
                termination,
            }
        };

        if !f.is_finite() || grad.iter().any(|g| !g.is_finite()) {
            return finish(x, f, 0, evaluations, Termination::NonFinite);
        }
        let mut gnorm = inf_norm(&grad);
        let state = IterationState {
            iteration: 0,
            x: &x,
            loss: f,
            grad_inf_norm: gnorm,
        };
        if observer(&state) == Control::Stop {
            return finish(x, f, 0, evaluations, Termination::Stopped);
        }
        if gnorm <= cfg.grad_tolerance {
            return finish(x, f, 0, evaluations, Termination::GradTol);
        }

        let mut history: VecDeque<Pair> = VecDeque::with_capacity(cfg.history_size);
        for iteration in 1..=cfg.max_iterations {
            let mut direction = two_loop(&grad, &history);
            let mut slope = dot(&grad, &direction);
            if slope >= 0.0 || !slope.is_finite() {
                history.clear();
                direction = grad.iter().map(|g| -g).collect();
                slope = -dot(&grad, &grad);
            }

            let accepted = loop {
                let search = Search {
                    objective: &mut *objective,
                    x: &x,
                    f0: f,
                    slope0: slope,
                    direction: &direction,
                    cfg: cfg.line_search,
                    evaluations: 0,
                };
                let (outcome, evals) = search.run(1.0);
                evaluations += evals;
                match outcome {
                    Outcome::Accepted(p) => break Ok(p),
                    Outcome::Failed { best } if history.is_empty() => break Err(best),
                    Outcome::Failed { .. } => {
                        history.clear();
                        direction = grad.iter().map(|g| -g).collect();
                        slope = -dot(&grad, &grad);
                    }
                }
            };

            let probe = match accepted {
                Ok(p) => p,
                Err(best) => {
                    if let Some(b) = best.filter(|b| b.f < f) {
                        return finish(
                            b.x,
                            b.f,
                            iteration,
                            evaluations,
                            Termination::LineSearchFailure,
                        );
                    }
                    return finish(
                        x,
                        f,
                        iteration - 1,
                        evaluations,
                        Termination::LineSearchFailure,
                    );
                }
            };
            debug_assert!(probe.f <= f + cfg.line_search.c1 * probe.alpha * slope);
            debug_assert!(probe.slope.abs() <= -cfg.line_search.c2 * slope);

            let s: Vec<f64> = probe.x.iter().zip(&x).map(|(a, b)| a - b).collect();
            let y: Vec<f64> = probe.grad.iter().zip(&grad).map(|(a, b)| a - b).collect();
            let sy = dot(&s, &y);
            if cfg.history_size > 0 && sy > 0.0 && sy.is_finite() {
                if history.len() == cfg.history_size {
                    history.pop_front();
                }
                history.push_back(Pair {
                    s,
                    y,
                    rho: 1.0 / sy,
                });
            }

            let f_prev = f;
            x = probe.x;
            grad = probe.grad;
            f = probe.f;
            gnorm = inf_norm(&grad);

            let state = IterationState {
                iteration,
                x: &x,
                loss: f,
                grad_inf_norm: gnorm,
            };
            if observer(&state) == Control::Stop {
                return finish(x, f, iteration, evaluations, Termination::Stopped);
            }
            if gnorm <= cfg.grad_tolerance {
                return finish(x, f, iteration, evaluations, Termination::GradTol);
            }
            let scale = f_prev.abs().max(f.abs()).max(1.0);
            if (f_prev - f) / scale <= cfg.loss_tolerance {
                return finish(x, f, iteration, evaluations, Termination::LossTol);
            }
        }
        finish(x, f, cfg.max_iterations, evaluations, Termination::MaxIter)
    }
}

#[cfg(test)]
mod tests {
    use super::super::minimize;
    use super::*;
    use proptest::prelude::*;

    fn quadratic(c: Vec<f64>) -> impl FnMut(&[f64], &mut [f64]) -> f64 {
        move |x, g| {
            let mut f = 0.0;
            for i in 0..x.len() {
                g[i] = x[i] - c[i];
                f += 0.5 * g[i] * g[i];
            }
            f
        }
    }

    fn rosenbrock(x: &[f64], g: &mut [f64]) -> f64 {
        let (a, b) = (x[0], x[1]);
        g[0] = -2.0 * (1.0 - a) - 400.0 * a * (b - a * a);
        g[1] = 200.0 * (b - a * a);
        (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2)
    }

    fn dist(a: &[f64], b: &[f64]) -> f64 {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    #[test]
    fn quadratic_converges_fast() {
        let c = vec![1.0, -2.0, 3.5, 0.25];
        let r = minimize(
            quadratic(c.clone()),
            vec![10.0, 4.0, -7.0, 0.0],
            &OptimizerConfig::default(),
        );
        assert!(dist(&r.final_params, &c) < 1e-8, "{r:?}");
        assert!(r.iterations <= 10);
        assert!(r.converged);
    }

    #[test]
    fn rosenbrock_from_classic_start() {
        let r = minimize(rosenbrock, vec![-1.2, 1.0], &OptimizerConfig::default());
        assert!(r.final_loss < 1e-6, "{r:?}");
        assert!(r.iterations <= 200);
    }

    #[test]
    fn stationary_start() {
        let r = minimize(
            quadratic(vec![2.0, 2.0]),
            vec![2.0, 2.0],
            &OptimizerConfig::default(),
        );
        assert!(r.converged);
        assert_eq!(r.iterations, 0);
        assert_eq!(r.termination, Termination::GradTol);
    }

    #[test]
    fn zero_history_is_steepest_descent() {
        let cfg = OptimizerConfig {
            history_size: 0,
            ..OptimizerConfig::default()
        };
        let c = vec![3.0, -1.0, 0.5];
        let r = minimize(quadratic(c.clone()), vec![0.0; 3], &cfg);
        assert!(dist(&r.final_params, &c) < 1e-8);
        // Anisotropic quadratic still converges, slowly.
        let aniso = |x: &[f64], g: &mut [f64]| {
            g[0] = x[0];
            g[1] = 10.0 * x[1];
            0.5 * x[0] * x[0] + 5.0 * x[1] * x[1]
        };
        let r = minimize(aniso, vec![1.0, 1.0], &cfg);
        assert!(r.final_loss < 1e-12, "{r:?}");
    }

    #[test]
    fn non_finite_start_is_reported() {
        let r = minimize(
            |_: &[f64], _: &mut [f64]| f64::NAN,
            vec![0.0],
            &OptimizerConfig::default(),
        );
        assert_eq!(r.termination, Termination::NonFinite);
        assert!(!r.converged);
    }

    #[test]
    fn observer_can_stop() {
        let mut seen = 0;
        let r = Lbfgs::default().minimize_with(&mut rosenbrock, vec![-1.2, 1.0], &mut |s| {
            seen += 1;
            if s.iteration == 3 {
                Control::Stop
            } else {
                Control::Continue
            }
        });
        assert_eq!(r.termination, Termination::Stopped);
        assert_eq!(r.iterations, 3);
        assert_eq!(seen, 4);
    }

    #[test]
    fn line_search_failure_keeps_best() {
        // Non-smooth |x| has no strong Wolfe step once the search straddles
        // the kink; the result must still not be worse than the start.
        let abs = |x: &[f64], g: &mut [f64]| {
            g[0] = x[0].signum();
            x[0].abs()
        };
        let r = minimize(abs, vec![0.3], &OptimizerConfig::default());
        assert!(r.final_loss <= 0.3);
    }

    proptest! {
        #[test]
        fn quadratic_any_start(
            c in proptest::collection::vec(-100.0f64..100.0, 1..8),
            seed in proptest::collection::vec(-100.0f64..100.0, 8),
        ) {
            let x0 = seed[..c.len()].to_vec();
            let r = minimize(quadratic(c.clone()), x0, &OptimizerConfig::default());
            prop_assert!(dist(&r.final_params, &c) < 1e-8);
            prop_assert!(r.iterations <= 10);
        }

        #[test]
        fn never_worse_than_start(x0 in -3.0f64..3.0, y0 in -3.0f64..3.0, hist in 0usize..12) {
            let cfg = OptimizerConfig { history_size: hist, max_iterations: 50, ..Default::default() };
            let r = minimize(rosenbrock, vec![x0, y0], &cfg);
            prop_assert!(r.final_loss <= r.initial_loss);
            let again = minimize(rosenbrock, vec![x0, y0], &cfg);
            prop_assert_eq!(r, again);
        }
    }
}
