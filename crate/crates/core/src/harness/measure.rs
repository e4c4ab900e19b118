use std::ops::RangeInclusive;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fit::Trainer;
use super::labeling::{labeling_stream, LabelingStream};
use super::{CapacityMeasurement, HarnessConfig, MeasureKind, NRecord, ParamDump};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::mlp::LabeledSet;
use crate::rng::derive_seed;
use crate::theory::{capacity_bounds, mk_skip_threshold, ArchitectureSpec};

const TAG_DATASET: u64 = 0x4441_5441; // "DATA"
const TAG_LABELS: u64 = 0x4c41_4253; // "LABS"

/// When a per-dataset trial may stop before every labeling is trained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum StopRule {
    /// Stop at the first labeling that cannot be fit.
    FirstMiss,
    /// Stop once fits reach half the stream, or misses exceed half.
    Majority,
    /// Train every labeling.
    Never,
}

#[derive(Debug)]
struct Trial {
    fit: u64,
    success: bool,
    last_fit: Option<(u64, Vec<f64>)>,
}

struct Sweep<'a> {
    cfg: &'a HarnessConfig,
    trainer: Trainer,
    deadline: Option<Instant>,
    datasets: Vec<Dataset>,
    chunk: usize,
}

impl<'a> Sweep<'a> {
    fn new(arch: &ArchitectureSpec, cfg: &'a HarnessConfig, max_n: usize) -> Result<Self> {
        arch.validate()?;
        cfg.validate()?;
        let trainer = Trainer::new(arch, &cfg.trainer, cfg.l2)?;
        let datasets = (0..cfg.datasets)
            .map(|d| Dataset::generate(max_n, arch.input_dim, dataset_seed(cfg.base_seed, d)))
            .collect::<Result<Vec<_>>>()?;
        let threads = rayon::current_num_threads();
        Ok(Sweep {
            cfg,
            trainer,
            deadline: cfg
                .time_budget_seconds
                .map(|s| Instant::now() + Duration::from_secs_f64(s)),
            datasets,
            chunk: if threads <= 1 { 1 } else { 2 * threads },
        })
    }

    fn expired(&self) -> bool {
        self.deadline.is_some_and(|d| Instant::now() >= d)
    }

    fn stream(&self, dataset: usize, n: usize) -> LabelingStream {
        let seed = derive_seed(&[self.cfg.base_seed, TAG_LABELS, dataset as u64, n as u64]);
        labeling_stream(n, self.cfg.max_exhaustive_bits, seed)
    }

    /// Train the labelings of one dataset prefix under `rule`. Chunks run in
    /// parallel and are replayed in stream order, so the decision matches a
    /// sequential run exactly. `None` when the time budget expired.
    fn trial(&self, dataset: usize, n: usize, rule: StopRule) -> Option<Trial> {
        let data = self.datasets[dataset]
            .prefix(n)
            .expect("n within the drawn sample");
        let dseed = data.seed();
        let stream = self.stream(dataset, n);
        let total = stream.len();
        let restarts = self.cfg.restarts;
        let keep = self.cfg.keep_params;

        let mut fit = 0u64;
        let mut seen = 0u64;
        let mut last_fit = None;
        let mut decided: Option<bool> = None;
        while seen < total && decided.is_none() {
            if self.expired() {
                return None;
            }
            let end = (seen + self.chunk as u64).min(total);
            let results: Vec<Option<Vec<f64>>> = (seen..end)
                .into_par_iter()
                .map(|i| {
                    let set = LabeledSet {
                        dataset: &data,
                        labels: stream.labels(i),
                    };
                    let key = derive_seed(&[self.cfg.base_seed, dseed, i]);
                    self.trainer.fit_with_restarts(&set, restarts, key)
                })
                .collect();
            for (i, r) in (seen..end).zip(results) {
                seen = i + 1;
                match r {
                    Some(params) => {
                        fit += 1;
                        if keep {
                            last_fit = Some((i, params));
                        }
                    }
                    None if rule == StopRule::FirstMiss => {
                        decided = Some(false);
                        break;
                    }
                    None => {}
                }
                if rule == StopRule::Majority {
                    let misses = seen - fit;
                    if 2 * fit >= total {
                        decided = Some(true);
                        break;
                    }
                    if 2 * misses > total {
                        decided = Some(false);
                        break;
                    }
                }
            }
        }
        let success = decided.unwrap_or(match rule {
            StopRule::Majority => 2 * fit >= total,
            _ => fit == total,
        });
        Some(Trial {
            fit,
            success,
            last_fit,
        })
    }

    /// Best trial over the datasets at sample count `n`, stopping at the
    /// first dataset that meets the criterion.
    fn best_over_datasets(
        &self,
        n: usize,
        rule: StopRule,
        dumps: &mut Vec<ParamDump>,
    ) -> Option<NRecord> {
        let stream = self.stream(0, n);
        let mut record = NRecord {
            n,
            tested: stream.len(),
            fit: 0,
            exhaustive: stream.is_exhaustive(),
            datasets_tried: 0,
            best_dataset: 0,
            success: false,
        };
        let mut best_params = None;
        for d in 0..self.datasets.len() {
            let t = self.trial(d, n, rule)?;
            record.datasets_tried += 1;
            if t.fit > record.fit || d == 0 {
                record.fit = t.fit;
                record.best_dataset = d;
                best_params = t.last_fit;
            }
            if t.success {
                record.success = true;
                record.fit = t.fit;
                record.best_dataset = d;
                break;
            }
        }
        if let Some((labeling, params)) = best_params {
            dumps.push(ParamDump {
                n,
                dataset: record.best_dataset,
                labeling,
                params,
            });
        }
        Some(record)
    }
}

fn dataset_seed(base: u64, index: usize) -> u64 {
    derive_seed(&[base, TAG_DATASET, index as u64])
}

/// Empirical lossless-memory dimension.
///
/// `n` grows from 1; a sample count passes when the best dataset's share of
/// fit labelings (counted up to the first miss) reaches
/// `lm_stop_fraction`. The sweep ends at the first failing `n`.
pub fn measure_lm(arch: &ArchitectureSpec, cfg: &HarnessConfig) -> Result<CapacityMeasurement> {
    let start = Instant::now();
    let sweep = Sweep::new(arch, cfg, cfg.max_samples)?;
    let bounds = capacity_bounds(arch);
    let mut per_n = Vec::new();
    let mut dumps = Vec::new();
    let mut measured = 0;
    let mut partial = false;
    for n in 1..=cfg.max_samples {
        let Some(mut record) = sweep.best_over_datasets(n, StopRule::FirstMiss, &mut dumps) else {
            partial = true;
            break;
        };
        let pass = record.fraction() >= cfg.lm_stop_fraction;
        record.success = pass;
        per_n.push(record);
        if !pass {
            break;
        }
        measured = n;
    }
    Ok(CapacityMeasurement {
        kind: MeasureKind::Lm,
        arch: arch.clone(),
        measured,
        theoretical: bounds.lm,
        bounds,
        per_n,
        partial,
        runtime_seconds: start.elapsed().as_secs_f64(),
        param_dumps: dumps,
    })
}

/// Empirical MacKay dimension.
///
/// With the skip shortcut, sample counts up to `2h(k-1) + k + 1` are
/// assumed to pass. A dataset passes at `n` once half the labelings fit;
/// the result is the largest passing `n`, and the sweep ends once the best
/// share drops below `mk_stop_fraction`.
pub fn measure_mk(arch: &ArchitectureSpec, cfg: &HarnessConfig) -> Result<CapacityMeasurement> {
    let start = Instant::now();
    let skipped = if cfg.mk_skip_shortcut {
        mk_skip_threshold(arch)?
    } else {
        0
    };
    if skipped >= cfg.max_samples {
        return Err(Error::config(format!(
            "skip threshold {skipped} leaves nothing to test below max_samples = {}",
            cfg.max_samples
        )));
    }
    let sweep = Sweep::new(arch, cfg, cfg.max_samples)?;
    let bounds = capacity_bounds(arch);
    let mut per_n = Vec::new();
    let mut dumps = Vec::new();
    let mut measured = skipped;
    let mut partial = false;
    for n in skipped + 1..=cfg.max_samples {
        let Some(record) = sweep.best_over_datasets(n, StopRule::Majority, &mut dumps) else {
            partial = true;
            break;
        };
        if record.success {
            measured = n;
        }
        let below = record.fraction() < cfg.mk_stop_fraction;
        per_n.push(record);
        if below {
            break;
        }
    }
    Ok(CapacityMeasurement {
        kind: MeasureKind::Mk,
        arch: arch.clone(),
        measured,
        theoretical: bounds.mk,
        bounds,
        per_n,
        partial,
        runtime_seconds: start.elapsed().as_secs_f64(),
        param_dumps: dumps,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalCurvePoint {
    pub n: usize,
    /// `n` over the theoretical LM dimension: 1 is the LM point, 2 the MK
    /// point.
    pub x_theoretical: f64,
    pub fraction: f64,
    pub tested: u64,
    pub fit: u64,
    pub exhaustive: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveMeasurement {
    pub arch: ArchitectureSpec,
    pub points: Vec<EmpiricalCurvePoint>,
    pub partial: bool,
    pub runtime_seconds: f64,
}

/// Share of fit labelings at each `n` on the first dataset, training every
/// labeling in the stream (no early exits).
pub fn measure_curve(
    arch: &ArchitectureSpec,
    n_range: RangeInclusive<usize>,
    cfg: &HarnessConfig,
) -> Result<CurveMeasurement> {
    let start = Instant::now();
    let (lo, hi) = (*n_range.start(), *n_range.end());
    if lo == 0 || lo > hi || hi > cfg.max_samples {
        return Err(Error::config(format!(
            "curve range {lo}..={hi} must lie within 1..={}",
            cfg.max_samples
        )));
    }
    let single = HarnessConfig {
        datasets: 1,
        ..cfg.clone()
    };
    let sweep = Sweep::new(arch, &single, hi)?;
    let lm = capacity_bounds(arch).lm as f64;
    let mut points = Vec::new();
    let mut partial = false;
    for n in n_range {
        let Some(t) = sweep.trial(0, n, StopRule::Never) else {
            partial = true;
            break;
        };
        let stream = sweep.stream(0, n);
        points.push(EmpiricalCurvePoint {
            n,
            x_theoretical: n as f64 / lm,
            fraction: t.fit as f64 / stream.len() as f64,
            tested: stream.len(),
            fit: t.fit,
            exhaustive: stream.is_exhaustive(),
        });
    }
    Ok(CurveMeasurement {
        arch: arch.clone(),
        points,
        partial,
        runtime_seconds: start.elapsed().as_secs_f64(),
    })
}
