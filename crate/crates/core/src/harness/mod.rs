//! The shattering protocol.
//!
//! For growing sample counts `n`, points are drawn in random position and
//! labelings are enumerated (or sampled); each labeling is trained with
//! restarts until the thresholded network reproduces it exactly. The
//! lossless-memory (LM) search requires (almost) every labeling to fit,
//! the MacKay (MK) search at least half of them.

mod fit;
mod labeling;
mod measure;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::theory::{ArchitectureSpec, CapacityBounds};

pub use fit::{try_fit, Trainer, TrainerConfig};
pub use labeling::{labeling_stream, labels_from_code, LabelingStream, MAX_LABELED_POINTS};
pub use measure::{measure_curve, measure_lm, measure_mk, CurveMeasurement, EmpiricalCurvePoint};

pub use crate::data::Dataset;

/// Dataset generation as exposed by the protocol.
pub fn generate_dataset(n: usize, k: usize, seed: u64) -> Result<Dataset> {
    Dataset::generate(n, k, seed)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MeasureKind {
    #[serde(rename = "LM")]
    Lm,
    #[serde(rename = "MK")]
    Mk,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HarnessConfig {
    /// Exhaustive enumeration while `n - 1` is at most this; otherwise
    /// `2^max_exhaustive_bits` labelings are sampled.
    pub max_exhaustive_bits: u32,
    pub restarts: usize,
    pub datasets: usize,
    pub lm_stop_fraction: f64,
    pub mk_stop_fraction: f64,
    pub base_seed: u64,
    pub trainer: TrainerConfig,
    /// L2 coefficient of the training loss.
    pub l2: f64,
    /// Largest sample count the sweep will reach.
    pub max_samples: usize,
    /// Start the MK sweep above `2h(k-1) + k + 1` (one hidden layer only).
    pub mk_skip_shortcut: bool,
    pub time_budget_seconds: Option<f64>,
    /// Record one fitted parameter vector per sample count.
    pub keep_params: bool,
}

impl Default for HarnessConfig {
    fn default() -> Self {
        HarnessConfig::lm()
    }
}

impl HarnessConfig {
    pub fn lm() -> Self {
        HarnessConfig {
            max_exhaustive_bits: 15,
            restarts: 20,
            datasets: 20,
            lm_stop_fraction: 0.95,
            mk_stop_fraction: 0.45,
            base_seed: 0,
            trainer: TrainerConfig::default(),
            l2: 0.0,
            max_samples: 80,
            mk_skip_shortcut: true,
            time_budget_seconds: None,
            keep_params: false,
        }
    }

    pub fn mk() -> Self {
        HarnessConfig {
            max_exhaustive_bits: 10,
            max_samples: 120,
            ..HarnessConfig::lm()
        }
    }

    /// Single-dataset curve measurement with at most `2^10` labelings.
    pub fn curve() -> Self {
        HarnessConfig {
            datasets: 1,
            ..HarnessConfig::mk()
        }
    }

    pub fn for_kind(kind: MeasureKind) -> Self {
        match kind {
            MeasureKind::Lm => Self::lm(),
            MeasureKind::Mk => Self::mk(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (mk, lm) = (self.mk_stop_fraction, self.lm_stop_fraction);
        if !(0.0 < mk && mk < 0.5 && 0.5 < lm && lm <= 1.0) {
            return Err(Error::config(format!(
                "stop fractions need 0 < mk < 0.5 < lm <= 1, got mk = {mk}, lm = {lm}"
            )));
        }
        if self.restarts == 0 || self.datasets == 0 {
            return Err(Error::config("restarts and datasets must be positive"));
        }
        if self.max_exhaustive_bits > 40 {
            return Err(Error::config(
                "max_exhaustive_bits above 40 is not supported",
            ));
        }
        if self.max_samples == 0 || self.max_samples > MAX_LABELED_POINTS {
            return Err(Error::config(format!(
                "max_samples must lie in 1..={MAX_LABELED_POINTS}"
            )));
        }
        if self.l2.is_nan() || self.l2 < 0.0 {
            return Err(Error::config("l2 must be nonnegative"));
        }
        if let Some(t) = self.time_budget_seconds {
            if t.is_nan() || t <= 0.0 {
                return Err(Error::config("time budget must be positive"));
            }
        }
        self.trainer.validate()
    }
}

/// Outcome at one sample count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NRecord {
    pub n: usize,
    /// Labelings in the stream for this `n`.
    pub tested: u64,
    /// Labelings fit on the best dataset.
    pub fit: u64,
    pub exhaustive: bool,
    pub datasets_tried: usize,
    pub best_dataset: usize,
    /// The criterion (LM or MK) was met on some dataset.
    pub success: bool,
}

impl NRecord {
    pub fn fraction(&self) -> f64 {
        self.fit as f64 / self.tested as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamDump {
    pub n: usize,
    pub dataset: usize,
    pub labeling: u64,
    pub params: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacityMeasurement {
    pub kind: MeasureKind,
    pub arch: ArchitectureSpec,
    pub measured: usize,
    /// The bound for this kind: `|NN|` for LM, `2|NN|` for MK.
    pub theoretical: usize,
    pub bounds: CapacityBounds,
    pub per_n: Vec<NRecord>,
    /// The time budget expired before the sweep finished.
    pub partial: bool,
    pub runtime_seconds: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub param_dumps: Vec<ParamDump>,
}
