//! Parameter counting and the capacity bounds of dense feed-forward
//! perceptron networks.
//!
//! Every unit contributes `fan_in + 1` parameters (the bias counts as a
//! weight). The lossless-memory dimension of a network equals its parameter
//! count and the MacKay dimension is twice that; both are additive over the
//! constituent units.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default cap on the number of hidden layers.
pub const MAX_DEPTH: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Tanh,
    Logistic,
    Identity,
}

impl Activation {
    pub const ALL: [Activation; 4] = [
        Activation::Relu,
        Activation::Tanh,
        Activation::Logistic,
        Activation::Identity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Activation::Relu => "relu",
            Activation::Tanh => "tanh",
            Activation::Logistic => "logistic",
            Activation::Identity => "identity",
        }
    }
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Activation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "relu" => Ok(Activation::Relu),
            "tanh" => Ok(Activation::Tanh),
            "logistic" | "sigmoid" => Ok(Activation::Logistic),
            "identity" | "linear" => Ok(Activation::Identity),
            other => Err(Error::config(format!("unknown activation '{other}'"))),
        }
    }
}

/// Shape of a dense feed-forward binary classifier: `input_dim` inputs,
/// the given hidden widths, and one logistic output unit with bias.
///
/// An empty `hidden_layers` list is a single perceptron.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ArchitectureSpec {
    #[serde(rename = "k")]
    pub input_dim: usize,
    #[serde(rename = "hidden")]
    pub hidden_layers: Vec<usize>,
    pub activation: Activation,
}

impl ArchitectureSpec {
    pub fn new(
        input_dim: usize,
        hidden_layers: Vec<usize>,
        activation: Activation,
    ) -> Result<Self> {
        let arch = ArchitectureSpec {
            input_dim,
            hidden_layers,
            activation,
        };
        arch.validate()?;
        Ok(arch)
    }

    pub fn perceptron(input_dim: usize) -> Result<Self> {
        Self::new(input_dim, Vec::new(), Activation::Identity)
    }

    pub fn one_hidden(input_dim: usize, width: usize, activation: Activation) -> Result<Self> {
        Self::new(input_dim, vec![width], activation)
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 {
            return Err(Error::config("input dimension must be at least 1"));
        }
        if self.hidden_layers.len() > MAX_DEPTH {
            return Err(Error::config(format!(
                "at most {MAX_DEPTH} hidden layers are supported, got {}",
                self.hidden_layers.len()
            )));
        }
        if let Some(i) = self.hidden_layers.iter().position(|&h| h == 0) {
            return Err(Error::config(format!("hidden layer {i} has width 0")));
        }
        Ok(())
    }

    pub fn depth(&self) -> usize {
        self.hidden_layers.len()
    }

    /// Widths of every layer including input and the single output unit.
    pub fn layer_sizes(&self) -> Vec<usize> {
        let mut sizes = Vec::with_capacity(self.hidden_layers.len() + 2);
        sizes.push(self.input_dim);
        sizes.extend_from_slice(&self.hidden_layers);
        sizes.push(1);
        sizes
    }

    /// `(fan_in + 1)` for every unit, layer by layer, output unit last.
    pub fn per_unit_params(&self) -> Vec<usize> {
        self.layer_sizes()
            .windows(2)
            .flat_map(|w| std::iter::repeat_n(w[0] + 1, w[1]))
            .collect()
    }

    pub fn param_count(&self) -> usize {
        self.layer_sizes()
            .windows(2)
            .map(|w| (w[0] + 1) * w[1])
            .sum()
    }
}

impl fmt::Display for ArchitectureSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "k={} hidden=[", self.input_dim)?;
        for (i, h) in self.hidden_layers.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{h}")?;
        }
        write!(f, "] {}", self.activation)
    }
}

/// Theoretical capacities of an architecture.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CapacityBounds {
    pub param_count: usize,
    pub lm: usize,
    pub mk: usize,
    pub per_unit: Vec<usize>,
}

pub fn param_count(arch: &ArchitectureSpec) -> usize {
    arch.param_count()
}

pub fn capacity_bounds(arch: &ArchitectureSpec) -> CapacityBounds {
    let per_unit = arch.per_unit_params();
    let param_count: usize = per_unit.iter().sum();
    debug_assert_eq!(param_count, arch.param_count());
    CapacityBounds {
        param_count,
        lm: param_count,
        mk: 2 * param_count,
        per_unit,
    }
}

/// Bit capacity when every parameter is stored with `bits_per_weight` bits.
/// Only an annotation; the parameter count is the operative bound.
pub fn bit_capacity(arch: &ArchitectureSpec, bits_per_weight: u32) -> u64 {
    arch.param_count() as u64 * bits_per_weight as u64
}

/// `2h(k-1) + k + 1`: sample counts up to this value are skipped by the
/// MacKay search for a one-hidden-layer network.
pub fn mk_skip_threshold(arch: &ArchitectureSpec) -> Result<usize> {
    match arch.hidden_layers.as_slice() {
        [h] => {
            let k = arch.input_dim;
            Ok(2 * h * (k - 1) + k + 1)
        }
        other => Err(Error::config(format!(
            "the MacKay skip shortcut needs exactly one hidden layer, got {}",
            other.len()
        ))),
    }
}
