use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::Result;
use crate::mlp::{LabeledSet, Model};
use crate::optim::{
    Control, GradientDescent, GradientDescentConfig, Lbfgs, Minimizer, OptimizerConfig,
};
use crate::rng::derive_seed;
use crate::theory::ArchitectureSpec;

/// Which minimizer trains each restart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TrainerConfig {
    Lbfgs(OptimizerConfig),
    GradientDescent(GradientDescentConfig),
}

impl Default for TrainerConfig {
    fn default() -> Self {
        TrainerConfig::Lbfgs(OptimizerConfig::default())
    }
}

impl TrainerConfig {
    pub fn validate(&self) -> Result<()> {
        match self {
            TrainerConfig::Lbfgs(c) => c.validate(),
            TrainerConfig::GradientDescent(c) => {
                if c.learning_rate > 0.0 && c.max_iterations > 0 {
                    Ok(())
                } else {
                    Err(crate::Error::config(
                        "gradient descent needs a positive step and budget",
                    ))
                }
            }
        }
    }

    fn minimizer(&self) -> Box<dyn Minimizer> {
        match *self {
            TrainerConfig::Lbfgs(c) => Box::new(Lbfgs::new(c)),
            TrainerConfig::GradientDescent(c) => Box::new(GradientDescent::new(c)),
        }
    }
}

/// Trains one architecture on many labelings. Shared read-only across
/// worker threads.
pub struct Trainer {
    model: Model,
    minimizer: Box<dyn Minimizer>,
    l2: f64,
}

impl Trainer {
    pub fn new(arch: &ArchitectureSpec, trainer: &TrainerConfig, l2: f64) -> Result<Self> {
        trainer.validate()?;
        Ok(Trainer {
            model: Model::new(arch)?,
            minimizer: trainer.minimizer(),
            l2,
        })
    }

    pub fn model(&self) -> &Model {
        &self.model
    }

    /// One training run from the initialization `seed`; returns the final
    /// parameters if they reproduce every label. Training stops as soon as
    /// the thresholded output is exact.
    pub fn fit_once(&self, set: &LabeledSet<'_>, seed: u64) -> Option<Vec<f64>> {
        let mut x0 = vec![0.0; self.model.param_count()];
        crate::mlp::init_into(self.model.arch(), seed, &mut x0);
        let model = &self.model;
        let l2 = self.l2;
        let mut objective =
            |theta: &[f64], grad: &mut [f64]| model.loss_grad_into(theta, set, l2, grad);
        let mut fitted = false;
        let result = self
            .minimizer
            .minimize_with(&mut objective, x0, &mut |state| {
                if model.fits(state.x, set) {
                    fitted = true;
                    Control::Stop
                } else {
                    Control::Continue
                }
            });
        if fitted || model.fits(&result.final_params, set) {
            Some(result.final_params)
        } else {
            None
        }
    }

    /// Up to `restarts` runs; restart `r` initializes from
    /// `derive_seed([key, r])`. Stops at the first exact fit.
    pub fn fit_with_restarts(
        &self,
        set: &LabeledSet<'_>,
        restarts: usize,
        key: u64,
    ) -> Option<Vec<f64>> {
        (0..restarts as u64).find_map(|r| self.fit_once(set, derive_seed(&[key, r])))
    }
}

/// True iff some restart reproduces `labels` exactly on `dataset`.
/// Optimizer failures count as failed restarts.
pub fn try_fit(
    arch: &ArchitectureSpec,
    dataset: &Dataset,
    labels: &[bool],
    restarts: usize,
    trainer: &TrainerConfig,
    key: u64,
) -> Result<bool> {
    let set = LabeledSet::new(dataset, labels.to_vec())?;
    let t = Trainer::new(arch, trainer, 0.0)?;
    Ok(t.fit_with_restarts(&set, restarts, key).is_some())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{is_separable, SeparabilityQuery};
    use crate::theory::Activation;

    fn relu(k: usize, h: usize) -> ArchitectureSpec {
        ArchitectureSpec::one_hidden(k, h, Activation::Relu).unwrap()
    }

    #[test]
    fn single_point_always_fits() {
        for seed in 0..5 {
            let d = Dataset::generate(1, 3, seed).unwrap();
            for label in [false, true] {
                assert!(try_fit(
                    &relu(3, 2),
                    &d,
                    &[label],
                    20,
                    &TrainerConfig::default(),
                    seed
                )
                .unwrap());
            }
        }
    }

    #[test]
    fn xor_defeats_one_hidden_unit() {
        let square =
            Dataset::from_points(vec![1.0, 1.0, -1.0, 1.0, -1.0, -1.0, 1.0, -1.0], 2).unwrap();
        let xor = [false, true, false, true];
        assert!(!try_fit(&relu(2, 1), &square, &xor, 20, &TrainerConfig::default(), 0).unwrap());
        // Two hidden units are enough.
        assert!(try_fit(&relu(2, 2), &square, &xor, 20, &TrainerConfig::default(), 0).unwrap());
    }

    #[test]
    fn early_exit_at_first_restart() {
        let d = Dataset::generate(3, 2, 1).unwrap();
        let set = LabeledSet::new(&d, vec![false, true, true]).unwrap();
        let t = Trainer::new(&relu(2, 2), &TrainerConfig::default(), 0.0).unwrap();
        let first = t.fit_once(&set, derive_seed(&[9, 0]));
        assert!(first.is_some());
        assert_eq!(t.fit_with_restarts(&set, 20, 9), first);
    }

    #[test]
    fn label_count_mismatch_is_an_error() {
        let d = Dataset::generate(3, 2, 1).unwrap();
        assert!(try_fit(&relu(2, 1), &d, &[true], 1, &TrainerConfig::default(), 0).is_err());
    }

    #[test]
    fn identity_network_matches_perceptron_and_oracle() {
        let deep = ArchitectureSpec::new(2, vec![3, 2], Activation::Identity).unwrap();
        let single = ArchitectureSpec::perceptron(2).unwrap();
        for seed in 0..5 {
            let d = Dataset::generate(4, 2, seed).unwrap();
            for code in 0..16u32 {
                let labels: Vec<bool> = (0..4).map(|i| code >> i & 1 == 1).collect();
                let q = SeparabilityQuery {
                    points: &d,
                    labels: &labels,
                    homogeneous: false,
                };
                let truth = is_separable(&q).unwrap();
                let key = derive_seed(&[seed, code as u64]);
                let a = try_fit(&deep, &d, &labels, 20, &TrainerConfig::default(), key).unwrap();
                let b = try_fit(&single, &d, &labels, 20, &TrainerConfig::default(), key).unwrap();
                assert_eq!(a, truth, "identity net seed {seed} code {code}");
                assert_eq!(b, truth, "perceptron seed {seed} code {code}");
            }
        }
    }

    #[test]
    fn gradient_descent_trainer_fits_easy_labels() {
        let d = Dataset::generate(3, 2, 2).unwrap();
        let gd = TrainerConfig::GradientDescent(GradientDescentConfig {
            learning_rate: 0.5,
            max_iterations: 5000,
            grad_tolerance: 1e-9,
        });
        assert!(try_fit(&relu(2, 2), &d, &[false, true, false], 20, &gd, 0).unwrap());
    }
}
