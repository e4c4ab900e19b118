//! The `nncap` command line.
//!
//! Exit codes: 0 on success, 1 on usage, domain or config errors, 2 when a
//! time budget cut a measurement short (the partial report is still
//! written).

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use nncap_core::counting::{labeling_fraction, theoretical_curve, tnk_closed, tnk_recursive};
use nncap_core::harness::{measure_curve, measure_lm, measure_mk, HarnessConfig, TrainerConfig};
use nncap_core::oracle::count_separable;
use nncap_core::report::{
    measured_curve_csv, run_comparison, theory_curve_csv, BoundsReport, CompareConfig, CountReport,
    MeasuredCurveReport, MeasurementReport, OracleCountReport, TheoryCurveReport, SCHEMA_VERSION,
};
use nncap_core::theory::{capacity_bounds, Activation, ArchitectureSpec};
use nncap_core::{Dataset, OptimizerConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_PARTIAL: i32 = 2;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] nncap_core::Error),
    #[error("{0}: {1}")]
    Io(String, io::Error),
    #[error("{0}")]
    Usage(String),
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Parser)]
#[command(
    name = "nncap",
    version,
    about = "Capacity of perceptron networks: theory and measurement"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Global {
    /// Root seed for every random stream.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Wall-clock budget in seconds; measurements stop early and report
    /// partial results.
    #[arg(long = "time-budget", global = true)]
    time_budget: Option<f64>,
    /// Write the output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Exact counts and bounds.
    #[command(subcommand)]
    Theory(TheoryCommand),
    /// Empirical capacity measurements.
    #[command(subcommand)]
    Measure(MeasureCommand),
    /// Linear separability by linear programming.
    #[command(subcommand)]
    Oracle(OracleCommand),
    /// Measure LM and MK for every entry of a comparison config (TOML).
    Compare { config: PathBuf },
}

#[derive(Debug, Subcommand)]
enum TheoryCommand {
    /// Number of threshold functions T(n, k).
    Tnk {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        k: u64,
        /// Use the recurrence instead of the binomial sum.
        #[arg(long)]
        recursive: bool,
    },
    /// Characteristic curve T(n, k) / 2^n for n = 1..=n_max.
    Curve {
        #[arg(long)]
        k: u64,
        #[arg(long = "n-max")]
        n_max: u64,
    },
    /// Parameter count and LM/MK bounds.
    Bounds {
        #[command(flatten)]
        arch: ArchArgs,
    },
}

#[derive(Debug, Args)]
struct ArchArgs {
    /// Input dimension.
    #[arg(long)]
    k: usize,
    /// Hidden widths, comma separated; omit for a single perceptron.
    #[arg(long, value_delimiter = ',', num_args = 0..)]
    hidden: Vec<usize>,
    #[arg(long, default_value = "relu")]
    activation: String,
}

impl ArchArgs {
    fn spec(&self) -> CliResult<ArchitectureSpec> {
        let activation: Activation = self.activation.parse()?;
        Ok(ArchitectureSpec::new(
            self.k,
            self.hidden.clone(),
            activation,
        )?)
    }
}

#[derive(Debug, Args)]
struct HarnessArgs {
    #[command(flatten)]
    arch: ArchArgs,
    #[arg(long)]
    datasets: Option<usize>,
    #[arg(long)]
    restarts: Option<usize>,
    /// Enumerate all labelings up to 2^max-bits, sample beyond.
    #[arg(long = "max-bits")]
    max_bits: Option<u32>,
    #[arg(long = "max-samples")]
    max_samples: Option<usize>,
    #[arg(long = "max-iter")]
    max_iter: Option<usize>,
    #[arg(long)]
    history: Option<usize>,
    #[arg(long = "grad-tol")]
    grad_tol: Option<f64>,
    /// Train with plain gradient descent instead of L-BFGS.
    #[arg(long = "gradient-descent")]
    gradient_descent: bool,
    /// Include one fitted parameter vector per sample count in the report.
    #[arg(long = "dump-params")]
    dump_params: bool,
}

impl HarnessArgs {
    fn config(&self, base: HarnessConfig, global: &Global) -> CliResult<HarnessConfig> {
        let mut c = base;
        c.base_seed = global.seed;
        c.time_budget_seconds = global.time_budget;
        c.keep_params = self.dump_params;
        if let Some(v) = self.datasets {
            c.datasets = v;
        }
        if let Some(v) = self.restarts {
            c.restarts = v;
        }
        if let Some(v) = self.max_bits {
            c.max_exhaustive_bits = v;
        }
        if let Some(v) = self.max_samples {
            c.max_samples = v;
        }
        c.trainer = if self.gradient_descent {
            let mut gd = nncap_core::optim::GradientDescentConfig::default();
            if let Some(v) = self.max_iter {
                gd.max_iterations = v;
            }
            if let Some(v) = self.grad_tol {
                gd.grad_tolerance = v;
            }
            if self.history.is_some() {
                return Err(CliError::Usage("--history applies to L-BFGS only".into()));
            }
            TrainerConfig::GradientDescent(gd)
        } else {
            let mut o = OptimizerConfig::default();
            if let Some(v) = self.max_iter {
                o.max_iterations = v;
            }
            if let Some(v) = self.history {
                o.history_size = v;
            }
            if let Some(v) = self.grad_tol {
                o.grad_tolerance = v;
            }
            TrainerConfig::Lbfgs(o)
        };
        c.validate()?;
        Ok(c)
    }
}

#[derive(Debug, Subcommand)]
enum MeasureCommand {
    /// Lossless-memory dimension.
    Lm(HarnessArgs),
    /// MacKay dimension.
    Mk {
        #[command(flatten)]
        harness: HarnessArgs,
        /// Test every sample count instead of starting above 2h(k-1)+k+1.
        #[arg(long = "no-skip")]
        no_skip: bool,
    },
    /// Share of fit labelings per sample count on one dataset.
    Curve {
        #[command(flatten)]
        harness: HarnessArgs,
        #[arg(long = "n-min", default_value_t = 1)]
        n_min: usize,
        #[arg(long = "n-max")]
        n_max: usize,
    },
}

#[derive(Debug, Subcommand)]
enum OracleCommand {
    /// Count the separable labelings of n standard-normal points in k
    /// dimensions.
    Count {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        /// Hyperplanes through the origin (no bias).
        #[arg(long)]
        homogeneous: bool,
    },
}

/// Parse `argv` (including the program name) and run. Returns the process
/// exit code.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let informational =
                matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion);
            let _ = e.print();
            return if informational { EXIT_OK } else { EXIT_ERROR };
        }
    };
    match run(cli) {
        Ok(partial) if partial => EXIT_PARTIAL,
        Ok(_) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}

struct Output<'a> {
    global: &'a Global,
}

impl Output<'_> {
    fn format(&self, default: Format) -> Format {
        self.global.format.unwrap_or(default)
    }

    fn emit(&self, text: &str) -> CliResult<()> {
        match &self.global.out {
            Some(path) => {
                fs::write(path, text).map_err(|e| CliError::Io(path.display().to_string(), e))
            }
            None => {
                let mut out = io::stdout().lock();
                out.write_all(text.as_bytes())
                    .and_then(|_| out.flush())
                    .map_err(|e| CliError::Io("stdout".into(), e))
            }
        }
    }

    fn emit_json<T: Serialize>(&self, value: &T) -> CliResult<()> {
        let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
        s.push('\n');
        self.emit(&s)
    }

    fn unsupported(&self, what: &str) -> CliError {
        CliError::Usage(
            format!(
                "{what} does not support --format {:?}",
                self.format(Format::Json)
            )
            .to_lowercase(),
        )
    }
}

/// Returns whether the result is partial.
fn run(cli: Cli) -> CliResult<bool> {
    if let Some(t) = cli.global.threads {
        if t == 0 {
            return Err(CliError::Usage("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
    }
    let out = Output {
        global: &cli.global,
    };
    match &cli.command {
        Command::Theory(t) => theory(t, &out).map(|_| false),
        Command::Measure(m) => measure(m, &out),
        Command::Oracle(OracleCommand::Count { n, k, homogeneous }) => {
            oracle_count(*n, *k, *homogeneous, &out).map(|_| false)
        }
        Command::Compare { config } => compare(config, &out),
    }
}

fn theory(cmd: &TheoryCommand, out: &Output<'_>) -> CliResult<()> {
    match cmd {
        TheoryCommand::Tnk { n, k, recursive } => {
            let value = if *recursive {
                tnk_recursive(*n, *k)?
            } else {
                tnk_closed(*n, *k)?
            };
            match out.format(Format::Text) {
                Format::Text => out.emit(&format!("{value}\n")),
                Format::Json => out.emit_json(&CountReport {
                    schema_version: SCHEMA_VERSION,
                    n: *n,
                    k: *k,
                    value: value.to_string(),
                }),
                Format::Csv => out.emit(&format!(
                    "n,k,value,fraction\n{n},{k},{value},{:.16e}\n",
                    labeling_fraction(&value, *n)
                )),
            }
        }
        TheoryCommand::Curve { k, n_max } => {
            let points = theoretical_curve(*k, *n_max)?;
            match out.format(Format::Csv) {
                Format::Csv => out.emit(&theory_curve_csv(&points)),
                Format::Json => out.emit_json(&TheoryCurveReport {
                    schema_version: SCHEMA_VERSION,
                    k: *k,
                    points,
                }),
                Format::Text => Err(out.unsupported("theory curve")),
            }
        }
        TheoryCommand::Bounds { arch } => {
            let arch = arch.spec()?;
            let report = BoundsReport::from(capacity_bounds(&arch));
            match out.format(Format::Json) {
                Format::Json => out.emit_json(&report),
                Format::Text => out.emit(&format!(
                    "{arch}\nparam_count  {}\nlm           {}\nmk           {}\nper_unit     {:?}\n",
                    report.param_count, report.lm, report.mk, report.per_unit
                )),
                Format::Csv => Err(out.unsupported("theory bounds")),
            }
        }
    }
}

fn measure(cmd: &MeasureCommand, out: &Output<'_>) -> CliResult<bool> {
    let g = out.global;
    match cmd {
        MeasureCommand::Lm(args) => {
            let cfg = args.config(HarnessConfig::lm(), g)?;
            let m = measure_lm(&args.arch.spec()?, &cfg)?;
            emit_measurement(&MeasurementReport::new(&m, &cfg), out)
        }
        MeasureCommand::Mk { harness, no_skip } => {
            let mut cfg = harness.config(HarnessConfig::mk(), g)?;
            cfg.mk_skip_shortcut = !no_skip;
            let m = measure_mk(&harness.arch.spec()?, &cfg)?;
            emit_measurement(&MeasurementReport::new(&m, &cfg), out)
        }
        MeasureCommand::Curve {
            harness,
            n_min,
            n_max,
        } => {
            let mut cfg = harness.config(HarnessConfig::curve(), g)?;
            cfg.max_samples = cfg.max_samples.max(*n_max);
            let c = measure_curve(&harness.arch.spec()?, *n_min..=*n_max, &cfg)?;
            match out.format(Format::Csv) {
                Format::Csv => out.emit(&measured_curve_csv(&c.points))?,
                Format::Json => out.emit_json(&MeasuredCurveReport::new(&c, &cfg))?,
                Format::Text => return Err(out.unsupported("measure curve")),
            }
            Ok(c.partial)
        }
    }
}

fn emit_measurement(report: &MeasurementReport, out: &Output<'_>) -> CliResult<bool> {
    match out.format(Format::Json) {
        Format::Json => out.emit_json(report)?,
        Format::Text => out.emit(&report.to_text())?,
        Format::Csv => out.emit(&report.to_csv())?,
    }
    Ok(report.partial)
}

fn oracle_count(n: usize, k: usize, homogeneous: bool, out: &Output<'_>) -> CliResult<()> {
    let data = Dataset::generate(n, k, out.global.seed)?;
    let count = count_separable(&data, homogeneous)?;
    let weights = if homogeneous { k } else { k + 1 };
    let tnk = tnk_closed(n as u64, weights as u64)?;
    match out.format(Format::Text) {
        Format::Text => out.emit(&format!("count {count}\ntnk   {tnk}\n")),
        Format::Json => out.emit_json(&OracleCountReport {
            schema_version: SCHEMA_VERSION,
            n,
            k,
            homogeneous,
            seed: out.global.seed,
            count: count.to_string(),
            tnk: tnk.to_string(),
        }),
        Format::Csv => out.emit(&format!(
            "n,k,homogeneous,seed,count,tnk\n{n},{k},{homogeneous},{},{count},{tnk}\n",
            out.global.seed
        )),
    }
}

/// The text table goes to stdout unless `--format json`; with `--out` the
/// JSON report is also written there.
fn compare(path: &PathBuf, out: &Output<'_>) -> CliResult<bool> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(path.display().to_string(), e))?;
    let mut config = CompareConfig::from_toml(&text)?;
    if let Some(t) = out.global.time_budget {
        for e in &mut config.entries {
            e.time_budget_seconds.get_or_insert(t);
        }
    }
    let report = run_comparison(&config, out.global.seed)?;
    let json = serde_json::to_string_pretty(&report).expect("reports serialize") + "\n";
    if let Some(p) = &out.global.out {
        fs::write(p, &json).map_err(|e| CliError::Io(p.display().to_string(), e))?;
    }
    let stdout = match out.format(Format::Text) {
        Format::Text => report.to_text(),
        Format::Json => json,
        Format::Csv => return Err(out.unsupported("compare")),
    };
    print!("{stdout}");
    Ok(report.entries.iter().any(|e| e.partial))
}
