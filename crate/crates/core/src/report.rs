//! Serializable reports.
//!
//! Every JSON document carries `schema_version`; the matching JSON Schemas
//! live under `docs/schemas/`.

use std::cmp::Ordering;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::counting::CurvePoint;
use crate::error::{Error, Result};
use crate::harness::{
    measure_lm, measure_mk, CapacityMeasurement, CurveMeasurement, EmpiricalCurvePoint,
    HarnessConfig, MeasureKind, ParamDump, TrainerConfig,
};
use crate::theory::{capacity_bounds, Activation, ArchitectureSpec, CapacityBounds};

pub const SCHEMA_VERSION: u32 = 1;

/// Version accepted in comparison config files.
pub const COMPARE_CONFIG_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoreticalSummary {
    pub param_count: usize,
    pub lm: usize,
    pub mk: usize,
}

impl From<&CapacityBounds> for TheoreticalSummary {
    fn from(b: &CapacityBounds) -> Self {
        TheoreticalSummary {
            param_count: b.param_count,
            lm: b.lm,
            mk: b.mk,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerNEntry {
    pub n: usize,
    pub tested: u64,
    pub fit: u64,
    pub exhaustive: bool,
    pub datasets_tried: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementReport {
    pub schema_version: u32,
    pub kind: MeasureKind,
    pub arch: ArchitectureSpec,
    pub theoretical: TheoreticalSummary,
    pub measured: usize,
    pub per_n: Vec<PerNEntry>,
    pub config: HarnessConfig,
    pub seed: u64,
    pub runtime_seconds: f64,
    pub partial: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub param_dumps: Vec<ParamDump>,
}

impl MeasurementReport {
    pub fn new(m: &CapacityMeasurement, config: &HarnessConfig) -> Self {
        MeasurementReport {
            schema_version: SCHEMA_VERSION,
            kind: m.kind,
            arch: m.arch.clone(),
            theoretical: (&m.bounds).into(),
            measured: m.measured,
            per_n: m
                .per_n
                .iter()
                .map(|r| PerNEntry {
                    n: r.n,
                    tested: r.tested,
                    fit: r.fit,
                    exhaustive: r.exhaustive,
                    datasets_tried: r.datasets_tried,
                })
                .collect(),
            config: config.clone(),
            seed: config.base_seed,
            runtime_seconds: m.runtime_seconds,
            partial: m.partial,
            param_dumps: m.param_dumps.clone(),
        }
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let kind = match self.kind {
            MeasureKind::Lm => "LM",
            MeasureKind::Mk => "MK",
        };
        let bound = match self.kind {
            MeasureKind::Lm => self.theoretical.lm,
            MeasureKind::Mk => self.theoretical.mk,
        };
        let _ = writeln!(s, "{kind} {}", self.arch);
        let _ = writeln!(s, "measured     {}", self.measured);
        let _ = writeln!(s, "theoretical  {bound}");
        let _ = writeln!(s, "param_count  {}", self.theoretical.param_count);
        let _ = writeln!(s, "seed         {}", self.seed);
        let _ = writeln!(s, "partial      {}", self.partial);
        let _ = writeln!(
            s,
            "{:>4} {:>8} {:>8} {:>10} {:>8}",
            "n", "tested", "fit", "exhaustive", "datasets"
        );
        for r in &self.per_n {
            let _ = writeln!(
                s,
                "{:>4} {:>8} {:>8} {:>10} {:>8}",
                r.n, r.tested, r.fit, r.exhaustive, r.datasets_tried
            );
        }
        s
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("n,tested,fit,exhaustive,datasets_tried\n");
        for r in &self.per_n {
            let _ = writeln!(
                s,
                "{},{},{},{},{}",
                r.n, r.tested, r.fit, r.exhaustive, r.datasets_tried
            );
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub schema_version: u32,
    pub param_count: usize,
    pub lm: usize,
    pub mk: usize,
    pub per_unit: Vec<usize>,
}

impl From<CapacityBounds> for BoundsReport {
    fn from(b: CapacityBounds) -> Self {
        BoundsReport {
            schema_version: SCHEMA_VERSION,
            param_count: b.param_count,
            lm: b.lm,
            mk: b.mk,
            per_unit: b.per_unit,
        }
    }
}

/// Threshold-function count. The value is a decimal string since it
/// routinely exceeds 64 bits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountReport {
    pub schema_version: u32,
    pub n: u64,
    pub k: u64,
    pub value: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleCountReport {
    pub schema_version: u32,
    pub n: usize,
    pub k: usize,
    pub homogeneous: bool,
    pub seed: u64,
    pub count: String,
    /// `T(n, k)` for homogeneous queries, `T(n, k + 1)` otherwise.
    pub tnk: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TheoryCurveReport {
    pub schema_version: u32,
    pub k: u64,
    pub points: Vec<CurvePoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasuredCurveReport {
    pub schema_version: u32,
    pub arch: ArchitectureSpec,
    pub theoretical: TheoreticalSummary,
    pub config: HarnessConfig,
    pub seed: u64,
    pub points: Vec<EmpiricalCurvePoint>,
    pub runtime_seconds: f64,
    pub partial: bool,
}

impl MeasuredCurveReport {
    pub fn new(c: &CurveMeasurement, config: &HarnessConfig) -> Self {
        MeasuredCurveReport {
            schema_version: SCHEMA_VERSION,
            arch: c.arch.clone(),
            theoretical: (&capacity_bounds(&c.arch)).into(),
            config: config.clone(),
            seed: config.base_seed,
            points: c.points.clone(),
            runtime_seconds: c.runtime_seconds,
            partial: c.partial,
        }
    }
}

/// `n,k,x,fraction` with the fraction at 17 significant digits.
pub fn theory_curve_csv(points: &[CurvePoint]) -> String {
    let mut s = String::from("n,k,x,fraction\n");
    for p in points {
        let _ = writeln!(s, "{},{},{:?},{:.16e}", p.n, p.k, p.x, p.fraction);
    }
    s
}

/// `n,x_theoretical,fraction,tested,exhaustive`.
pub fn measured_curve_csv(points: &[EmpiricalCurvePoint]) -> String {
    let mut s = String::from("n,x_theoretical,fraction,tested,exhaustive\n");
    for p in points {
        let _ = writeln!(
            s,
            "{},{:?},{:?},{},{}",
            p.n, p.x_theoretical, p.fraction, p.tested, p.exhaustive
        );
    }
    s
}

/// A comparison config file:
///
/// ```toml
/// version = 1
///
/// [[entry]]
/// label = "relu k2 h1"
/// k = 2
/// hidden = [1]
/// seed = 0
/// ```
///
/// Unset entry fields take the harness defaults, which are echoed back in
/// the report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareConfig {
    pub version: u32,
    #[serde(default, rename = "entry")]
    pub entries: Vec<CompareEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareEntry {
    pub label: String,
    pub k: usize,
    pub hidden: Vec<usize>,
    #[serde(default = "default_activation")]
    pub activation: Activation,
    /// Falls back to the run's global seed.
    pub seed: Option<u64>,
    #[serde(default)]
    pub trainer: TrainerConfig,
    pub datasets: Option<usize>,
    pub restarts: Option<usize>,
    pub lm_max_bits: Option<u32>,
    pub mk_max_bits: Option<u32>,
    pub max_samples: Option<usize>,
    pub time_budget_seconds: Option<f64>,
}

fn default_activation() -> Activation {
    Activation::Relu
}

impl CompareEntry {
    pub fn arch(&self) -> Result<ArchitectureSpec> {
        ArchitectureSpec::new(self.k, self.hidden.clone(), self.activation)
    }

    /// The LM and MK harness configs this entry resolves to.
    pub fn harness_configs(&self, default_seed: u64) -> (HarnessConfig, HarnessConfig) {
        let apply = |mut c: HarnessConfig, bits: Option<u32>| {
            c.base_seed = self.seed.unwrap_or(default_seed);
            c.trainer = self.trainer;
            if let Some(d) = self.datasets {
                c.datasets = d;
            }
            if let Some(r) = self.restarts {
                c.restarts = r;
            }
            if let Some(b) = bits {
                c.max_exhaustive_bits = b;
            }
            if let Some(m) = self.max_samples {
                c.max_samples = m;
            }
            if self.time_budget_seconds.is_some() {
                c.time_budget_seconds = self.time_budget_seconds;
            }
            c
        };
        (
            apply(HarnessConfig::lm(), self.lm_max_bits),
            apply(HarnessConfig::mk(), self.mk_max_bits),
        )
    }
}

impl CompareConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: CompareConfig =
            toml::from_str(text).map_err(|e| Error::config(format!("comparison config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != COMPARE_CONFIG_VERSION {
            return Err(Error::config(format!(
                "unsupported comparison config version {} (expected {COMPARE_CONFIG_VERSION})",
                self.version
            )));
        }
        if self.entries.is_empty() {
            return Err(Error::config("comparison config lists no entries"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonEntry {
    pub label: String,
    pub arch: ArchitectureSpec,
    pub trainer: TrainerConfig,
    pub lm_config: HarnessConfig,
    pub mk_config: HarnessConfig,
    pub measured_lm: Option<usize>,
    pub measured_mk: Option<usize>,
    pub theoretical_lm: usize,
    pub theoretical_mk: usize,
    pub efficiency_lm: Option<f64>,
    pub efficiency_mk: Option<f64>,
    pub partial: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub schema_version: u32,
    pub entries: Vec<ComparisonEntry>,
}

/// Measure LM and MK for every entry. A failing entry records its error
/// and the run continues. Entries are sorted by LM efficiency, highest
/// first; entries without one come last.
pub fn run_comparison(config: &CompareConfig, default_seed: u64) -> Result<ComparisonReport> {
    config.validate()?;
    let mut entries: Vec<ComparisonEntry> = config
        .entries
        .iter()
        .map(|e| compare_one(e, default_seed))
        .collect::<Result<_>>()?;
    entries.sort_by(|a, b| match (a.efficiency_lm, b.efficiency_lm) {
        (Some(x), Some(y)) => y.partial_cmp(&x).unwrap_or(Ordering::Equal),
        (Some(_), None) => Ordering::Less,
        (None, Some(_)) => Ordering::Greater,
        (None, None) => Ordering::Equal,
    });
    Ok(ComparisonReport {
        schema_version: SCHEMA_VERSION,
        entries,
    })
}

fn compare_one(entry: &CompareEntry, default_seed: u64) -> Result<ComparisonEntry> {
    let arch = entry.arch()?;
    let bounds = capacity_bounds(&arch);
    let (lm_config, mk_config) = entry.harness_configs(default_seed);
    let mut out = ComparisonEntry {
        label: entry.label.clone(),
        arch: arch.clone(),
        trainer: entry.trainer,
        lm_config: lm_config.clone(),
        mk_config: mk_config.clone(),
        measured_lm: None,
        measured_mk: None,
        theoretical_lm: bounds.lm,
        theoretical_mk: bounds.mk,
        efficiency_lm: None,
        efficiency_mk: None,
        partial: false,
        error: None,
    };
    let mut errors = Vec::new();
    match measure_lm(&arch, &lm_config) {
        Ok(m) => {
            out.measured_lm = Some(m.measured);
            out.efficiency_lm = Some(m.measured as f64 / bounds.lm as f64);
            out.partial |= m.partial;
        }
        Err(e) => errors.push(format!("lm: {e}")),
    }
    match measure_mk(&arch, &mk_config) {
        Ok(m) => {
            out.measured_mk = Some(m.measured);
            out.efficiency_mk = Some(m.measured as f64 / bounds.mk as f64);
            out.partial |= m.partial;
        }
        Err(e) => errors.push(format!("mk: {e}")),
    }
    if !errors.is_empty() {
        out.error = Some(errors.join("; "));
    }
    Ok(out)
}

fn cell<T: ToString>(v: Option<T>) -> String {
    v.map_or_else(|| "-".to_string(), |v| v.to_string())
}

impl ComparisonReport {
    /// Fixed-width table with the same numbers as the JSON form.
    pub fn to_text(&self) -> String {
        let label_w = self
            .entries
            .iter()
            .map(|e| e.label.len())
            .max()
            .unwrap_or(0)
            .max(5);
        let arch_w = self
            .entries
            .iter()
            .map(|e| e.arch.to_string().len())
            .max()
            .unwrap_or(0)
            .max(4);
        let mut s = String::new();
        let _ = writeln!(
            s,
            "{:<label_w$}  {:<arch_w$}  {:>5} {:>5} {:>5} {:>5} {:>20} {:>20}  note",
            "label", "arch", "lm", "lm_th", "mk", "mk_th", "efficiency_lm", "efficiency_mk"
        );
        for e in &self.entries {
            let note = match (&e.error, e.partial) {
                (Some(err), _) => err.clone(),
                (None, true) => "partial".to_string(),
                (None, false) => String::new(),
            };
            let _ = writeln!(
                s,
                "{:<label_w$}  {:<arch_w$}  {:>5} {:>5} {:>5} {:>5} {:>20} {:>20}  {}",
                e.label,
                e.arch.to_string(),
                cell(e.measured_lm),
                e.theoretical_lm,
                cell(e.measured_mk),
                e.theoretical_mk,
                cell(e.efficiency_lm),
                cell(e.efficiency_mk),
                note
            );
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entry(label: &str, seed: u64) -> CompareEntry {
        CompareEntry {
            label: label.into(),
            k: 2,
            hidden: vec![1],
            activation: Activation::Relu,
            seed: Some(seed),
            trainer: TrainerConfig::default(),
            datasets: Some(3),
            restarts: Some(10),
            lm_max_bits: None,
            mk_max_bits: None,
            max_samples: None,
            time_budget_seconds: None,
        }
    }

    #[test]
    fn toml_config_parsing() {
        let cfg = CompareConfig::from_toml(
            "version = 1\n[[entry]]\nlabel = \"a\"\nk = 2\nhidden = [1]\n\n[[entry]]\nlabel = \"b\"\nk = 3\nhidden = [2]\nactivation = \"tanh\"\nseed = 7\ndatasets = 4\n[entry.trainer]\nkind = \"lbfgs\"\nhistory_size = 5\n",
        )
        .unwrap();
        assert_eq!(cfg.entries.len(), 2);
        assert_eq!(cfg.entries[0].activation, Activation::Relu);
        assert_eq!(cfg.entries[1].activation, Activation::Tanh);
        let (lm, mk) = cfg.entries[1].harness_configs(0);
        assert_eq!(
            (lm.datasets, lm.base_seed, lm.max_exhaustive_bits),
            (4, 7, 15)
        );
        assert_eq!(mk.max_exhaustive_bits, 10);
        match lm.trainer {
            TrainerConfig::Lbfgs(c) => assert_eq!(c.history_size, 5),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn config_errors() {
        assert!(CompareConfig::from_toml("version = 1\n").is_err());
        assert!(
            CompareConfig::from_toml("version = 2\n[[entry]]\nlabel=\"a\"\nk=2\nhidden=[1]\n")
                .is_err()
        );
        assert!(CompareConfig::from_toml(
            "version = 1\n[[entry]]\nlabel=\"a\"\nk=2\nhidden=[1]\nbogus=1\n"
        )
        .is_err());
        assert!(CompareConfig::from_toml("not toml at all [").is_err());
    }

    #[test]
    fn comparison_of_single_hidden_unit() {
        let cfg = CompareConfig {
            version: 1,
            entries: vec![entry("a", 0), entry("b", 1)],
        };
        let report = run_comparison(&cfg, 0).unwrap();
        assert_eq!(report.entries.len(), 2);
        for e in &report.entries {
            assert_eq!((e.theoretical_lm, e.theoretical_mk), (5, 10));
            assert_eq!(e.measured_lm, Some(3));
            assert_eq!(e.efficiency_lm, Some(0.6));
            assert!(e.error.is_none());
        }
        let text = report.to_text();
        assert_eq!(text.lines().count(), 3);
        assert!(text.lines().nth(1).unwrap().contains("0.6"));
    }

    #[test]
    fn failing_entry_is_recorded() {
        let mut bad = entry("deep", 0);
        bad.hidden = vec![2, 2];
        bad.max_samples = Some(6);
        let good = entry("good", 0);
        let report = run_comparison(
            &CompareConfig {
                version: 1,
                entries: vec![bad, good],
            },
            0,
        )
        .unwrap();
        assert_eq!(report.entries[0].label, "good");
        let deep = &report.entries[1];
        assert!(deep.error.as_deref().unwrap().starts_with("mk:"));
        assert!(deep.measured_lm.is_some());
        assert!(deep.measured_mk.is_none());
    }

    #[test]
    fn theory_csv_format() {
        let pts = crate::counting::theoretical_curve(3, 6).unwrap();
        let csv = theory_curve_csv(&pts);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "n,k,x,fraction");
        assert_eq!(lines[6], "6,3,2.0,5.0000000000000000e-1");
        for (line, p) in lines[1..].iter().zip(&pts) {
            let f: f64 = line.rsplit(',').next().unwrap().parse().unwrap();
            assert_eq!(f, p.fraction);
        }
    }
}
