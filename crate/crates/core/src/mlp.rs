//! Dense feed-forward binary classifier with a logistic output unit.
//!
//! Parameters are stored flat, layer by layer: the row-major
//! `[fan_out x fan_in]` weight matrix followed by the `fan_out` biases.
//! The objective is the mean binary cross-entropy of the logistic output plus
//! an optional L2 penalty `l2 * |W|^2 / 2` on weights (biases excluded).

use serde::Serialize;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::rng::CounterRng;
pub use crate::theory::Activation;
use crate::theory::ArchitectureSpec;

impl Activation {
    #[inline]
    pub fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Relu => z.max(0.0),
            Activation::Tanh => z.tanh(),
            Activation::Logistic => sigmoid(z),
            Activation::Identity => z,
        }
    }

    /// Derivative with respect to the pre-activation `z`, given the
    /// already-computed output `a = apply(z)`. `relu'(0)` is 0.
    #[inline]
    pub fn derivative(self, z: f64, a: f64) -> f64 {
        match self {
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Tanh => 1.0 - a * a,
            Activation::Logistic => a * (1.0 - a),
            Activation::Identity => 1.0,
        }
    }
}

pub fn activations_supported() -> [Activation; 4] {
    Activation::ALL
}

#[inline]
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^z)` without overflow.
#[inline]
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct LayerSlot {
    fan_in: usize,
    fan_out: usize,
    weights: usize,
    biases: usize,
    /// Offset of this layer's outputs in the per-sample activation buffer.
    act: usize,
}

/// Precomputed offsets for one architecture. Evaluation entry points take
/// the flat parameter slice directly so optimizers can work on `Vec<f64>`.
#[derive(Debug, Clone)]
pub struct Model {
    arch: ArchitectureSpec,
    layers: Vec<LayerSlot>,
    param_count: usize,
    act_len: usize,
}

impl Model {
    pub fn new(arch: &ArchitectureSpec) -> Result<Self> {
        arch.validate()?;
        let sizes = arch.layer_sizes();
        let mut layers = Vec::with_capacity(sizes.len() - 1);
        let mut offset = 0;
        let mut act = sizes[0];
        for w in sizes.windows(2) {
            let (fan_in, fan_out) = (w[0], w[1]);
            layers.push(LayerSlot {
                fan_in,
                fan_out,
                weights: offset,
                biases: offset + fan_in * fan_out,
                act,
            });
            offset += (fan_in + 1) * fan_out;
            act += fan_out;
        }
        debug_assert_eq!(offset, arch.param_count());
        Ok(Model {
            arch: arch.clone(),
            layers,
            param_count: offset,
            act_len: act,
        })
    }

    pub fn arch(&self) -> &ArchitectureSpec {
        &self.arch
    }

    pub fn param_count(&self) -> usize {
        self.param_count
    }

    /// Indices of weight (not bias) entries in the flat vector.
    pub fn is_weight(&self, index: usize) -> bool {
        self.layers
            .iter()
            .any(|l| index >= l.weights && index < l.biases)
    }

    /// Output pre-activation for one point. `pre` and `post` must hold
    /// `act_len` entries; on return they contain every layer's values.
    fn forward(&self, theta: &[f64], x: &[f64], pre: &mut [f64], post: &mut [f64]) -> f64 {
        let k = self.arch.input_dim;
        post[..k].copy_from_slice(x);
        pre[..k].copy_from_slice(x);
        let last = self.layers.len() - 1;
        let mut input = 0;
        for (li, l) in self.layers.iter().enumerate() {
            for o in 0..l.fan_out {
                let row = &theta[l.weights + o * l.fan_in..l.weights + (o + 1) * l.fan_in];
                let z = theta[l.biases + o]
                    + row
                        .iter()
                        .zip(&post[input..input + l.fan_in])
                        .map(|(w, a)| w * a)
                        .sum::<f64>();
                pre[l.act + o] = z;
                post[l.act + o] = if li == last {
                    z
                } else {
                    self.arch.activation.apply(z)
                };
            }
            input = l.act;
        }
        pre[self.act_len - 1]
    }

    pub fn logit(&self, theta: &[f64], x: &[f64]) -> f64 {
        let mut pre = vec![0.0; self.act_len];
        let mut post = vec![0.0; self.act_len];
        self.forward(theta, x, &mut pre, &mut post)
    }

    /// Class 1 iff the output pre-activation is strictly positive
    /// (logistic output strictly above 0.5).
    pub fn predict(&self, theta: &[f64], x: &[f64]) -> bool {
        self.logit(theta, x) > 0.0
    }

    /// True iff the thresholded output reproduces every label.
    pub fn fits(&self, theta: &[f64], data: &LabeledSet<'_>) -> bool {
        let mut pre = vec![0.0; self.act_len];
        let mut post = vec![0.0; self.act_len];
        data.dataset
            .points()
            .zip(&data.labels)
            .all(|(x, &y)| (self.forward(theta, x, &mut pre, &mut post) > 0.0) == y)
    }

    /// Loss at `theta`, writing the gradient into `grad`.
    pub fn loss_grad_into(
        &self,
        theta: &[f64],
        data: &LabeledSet<'_>,
        l2: f64,
        grad: &mut [f64],
    ) -> f64 {
        assert_eq!(theta.len(), self.param_count);
        assert_eq!(grad.len(), self.param_count);
        grad.iter_mut().for_each(|g| *g = 0.0);
        let n = data.dataset.n();
        let inv_n = 1.0 / n as f64;
        let mut pre = vec![0.0; self.act_len];
        let mut post = vec![0.0; self.act_len];
        let mut delta = vec![0.0; self.act_len];
        let mut loss = 0.0;

        for (x, &y) in data.dataset.points().zip(&data.labels) {
            let z = self.forward(theta, x, &mut pre, &mut post);
            let y = if y { 1.0 } else { 0.0 };
            loss += softplus(z) - y * z;
            delta[self.act_len - 1] = (sigmoid(z) - y) * inv_n;

            for li in (0..self.layers.len()).rev() {
                let l = self.layers[li];
                let input = if li == 0 { 0 } else { self.layers[li - 1].act };
                for o in 0..l.fan_out {
                    let d = delta[l.act + o];
                    grad[l.biases + o] += d;
                    let row = l.weights + o * l.fan_in;
                    for i in 0..l.fan_in {
                        grad[row + i] += d * post[input + i];
                    }
                }
                if li > 0 {
                    for i in 0..l.fan_in {
                        let mut back = 0.0;
                        for o in 0..l.fan_out {
                            back += theta[l.weights + o * l.fan_in + i] * delta[l.act + o];
                        }
                        let u = input + i;
                        delta[u] = back * self.arch.activation.derivative(pre[u], post[u]);
                    }
                }
            }
        }
        loss *= inv_n;

        if l2 > 0.0 {
            for l in &self.layers {
                for i in l.weights..l.biases {
                    loss += 0.5 * l2 * theta[i] * theta[i];
                    grad[i] += l2 * theta[i];
                }
            }
        }
        loss
    }
}

/// Network parameters with their architecture.
#[derive(Debug, Clone, PartialEq)]
pub struct Params {
    arch: ArchitectureSpec,
    values: Vec<f64>,
}

impl Params {
    pub fn from_flat(arch: &ArchitectureSpec, values: Vec<f64>) -> Result<Self> {
        arch.validate()?;
        let expected = arch.param_count();
        if values.len() != expected {
            return Err(Error::Shape {
                expected,
                actual: values.len(),
            });
        }
        Ok(Params {
            arch: arch.clone(),
            values,
        })
    }

    pub fn zeros(arch: &ArchitectureSpec) -> Result<Self> {
        Self::from_flat(arch, vec![0.0; arch.param_count()])
    }

    pub fn arch(&self) -> &ArchitectureSpec {
        &self.arch
    }

    pub fn flat(&self) -> &[f64] {
        &self.values
    }

    pub fn flat_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_flat(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Weight matrix `[fan_out x fan_in]` (row-major) and bias vector of
    /// `layer`, where the output unit is the last layer.
    pub fn layer(&self, layer: usize) -> (&[f64], &[f64]) {
        let sizes = self.arch.layer_sizes();
        let mut offset = 0;
        for w in sizes.windows(2).take(layer) {
            offset += (w[0] + 1) * w[1];
        }
        let (fan_in, fan_out) = (sizes[layer], sizes[layer + 1]);
        let split = offset + fan_in * fan_out;
        (
            &self.values[offset..split],
            &self.values[split..split + fan_out],
        )
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.values).expect("finite floats serialize")
    }
}

impl Serialize for Params {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.values.serialize(s)
    }
}

/// A dataset with one binary label per point.
#[derive(Debug, Clone)]
pub struct LabeledSet<'a> {
    pub dataset: &'a Dataset,
    pub labels: Vec<bool>,
}

impl<'a> LabeledSet<'a> {
    pub fn new(dataset: &'a Dataset, labels: Vec<bool>) -> Result<Self> {
        if labels.len() != dataset.n() {
            return Err(Error::Shape {
                expected: dataset.n(),
                actual: labels.len(),
            });
        }
        Ok(LabeledSet { dataset, labels })
    }

    pub fn complement(&self) -> LabeledSet<'a> {
        LabeledSet {
            dataset: self.dataset,
            labels: self.labels.iter().map(|&b| !b).collect(),
        }
    }
}

/// Glorot-uniform weights in `±sqrt(6 / (fan_in + fan_out))`, zero biases.
/// Deterministic in `(arch, seed)`.
pub fn init_params(arch: &ArchitectureSpec, seed: u64) -> Result<Params> {
    let mut values = vec![0.0; arch.param_count()];
    init_into(arch, seed, &mut values);
    Params::from_flat(arch, values)
}

pub(crate) fn init_into(arch: &ArchitectureSpec, seed: u64, values: &mut [f64]) {
    let mut rng = CounterRng::new(seed);
    let mut offset = 0;
    for w in arch.layer_sizes().windows(2) {
        let (fan_in, fan_out) = (w[0], w[1]);
        let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
        for v in &mut values[offset..offset + fan_in * fan_out] {
            *v = rng.uniform(-limit, limit);
        }
        offset += fan_in * fan_out;
        values[offset..offset + fan_out].fill(0.0);
        offset += fan_out;
    }
}

/// Loss and gradient with respect to the flat parameters. A non-finite
/// loss is reported as a training failure.
pub fn loss_and_grad(params: &Params, data: &LabeledSet<'_>, l2: f64) -> Result<(f64, Vec<f64>)> {
    if data.dataset.k() != params.arch.input_dim {
        return Err(Error::Shape {
            expected: params.arch.input_dim,
            actual: data.dataset.k(),
        });
    }
    let model = Model::new(&params.arch)?;
    let mut grad = vec![0.0; params.len()];
    let loss = model.loss_grad_into(&params.values, data, l2, &mut grad);
    if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
        return Err(Error::Training(format!("non-finite loss {loss}")));
    }
    Ok((loss, grad))
}

pub fn predict(params: &Params, x: &[f64]) -> Result<bool> {
    if x.len() != params.arch.input_dim {
        return Err(Error::Shape {
            expected: params.arch.input_dim,
            actual: x.len(),
        });
    }
    Ok(Model::new(&params.arch)?.predict(&params.values, x))
}
