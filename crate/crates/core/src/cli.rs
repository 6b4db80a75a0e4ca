//! Command-line front end: `run`, `sweep`, `validate` and `compare`.
//!
//! Every command writes its human-readable output to the supplied writer and
//! returns a [`Result`]; [`exit_code`] maps errors onto the process exit
//! status (0 ok, 1 logs differ, 2 configuration error, 3 numerical failure).

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use crate::config::{load_gait, load_robot, validate_file, RunConfig, SCHEMA_VERSION};
use crate::error::{Error, Result};
use crate::sim::{compare_logs, run_episode, summarize, LogTable, Metrics, SensorMode};
use crate::validate::Report;

/// Default output directory when `--out` is not given.
pub const OUT_DIR_ENV: &str = "HOPPER_OUT_DIR";
const DEFAULT_OUT_DIR: &str = "out";

pub const EXIT_OK: i32 = 0;
pub const EXIT_DIFFERENT: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "hopper", version, about = "Gantry hopping-leg simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate one episode and write log.csv and metrics.toml.
    Run(RunArgs),
    /// Run one episode per value of a parameter, in parallel.
    Sweep(SweepArgs),
    /// Check a robot or gait file rule by rule.
    Validate { file: PathBuf },
    /// Per-column maximum deviation between two logs.
    Compare {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, default_value_t = 0.0)]
        tol: f64,
    },
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub robot: Option<PathBuf>,
    #[arg(long)]
    pub gait: Option<PathBuf>,
    /// Episode length, s.
    #[arg(long)]
    pub duration: Option<f64>,
    #[arg(long, env = OUT_DIR_ENV, default_value = DEFAULT_OUT_DIR)]
    pub out: PathBuf,
    #[arg(long, value_parser = parse_sensor_mode)]
    pub sensor_mode: Option<SensorMode>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// `key=value` override, repeatable; see `RunConfig::with_overrides`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub sets: Vec<String>,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Parameter to vary, e.g. `peak_horizontal_force`.
    #[arg(long)]
    pub param: String,
    /// Comma-separated values.
    #[arg(long, value_delimiter = ',', required = true)]
    pub values: Vec<String>,
    /// Worker threads; defaults to the number of CPUs.
    #[arg(long)]
    pub jobs: Option<usize>,
}

fn parse_sensor_mode(s: &str) -> std::result::Result<SensorMode, String> {
    match s {
        "ideal" => Ok(SensorMode::Ideal),
        "quantized" => Ok(SensorMode::Quantized),
        _ => Err(format!("`{s}` is not one of ideal, quantized")),
    }
}

/// Everything needed to reproduce a run or a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub robot: Option<PathBuf>,
    pub gait: Option<PathBuf>,
    pub duration: Option<f64>,
    pub out_dir: PathBuf,
    pub sensor_mode: Option<SensorMode>,
    pub seed: Option<u64>,
    pub sets: Vec<String>,
    pub sweep: Option<SweepAxis>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepAxis {
    pub param: String,
    pub values: Vec<String>,
}

impl From<RunArgs> for RunSpec {
    fn from(a: RunArgs) -> Self {
        Self {
            robot: a.robot,
            gait: a.gait,
            duration: a.duration,
            out_dir: a.out,
            sensor_mode: a.sensor_mode,
            seed: a.seed,
            sets: a.sets,
            sweep: None,
        }
    }
}

impl From<SweepArgs> for RunSpec {
    fn from(a: SweepArgs) -> Self {
        let mut spec = RunSpec::from(a.run);
        spec.sweep = Some(SweepAxis {
            param: a.param,
            values: a.values.into_iter().map(|v| v.trim().to_string()).collect(),
        });
        spec
    }
}

impl RunSpec {
    /// Defaults, then the config files, then the flags, then `--set`.
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut config = RunConfig::default();
        for path in [&self.robot, &self.gait].into_iter().flatten() {
            if !path.exists() {
                return Err(Error::io(
                    path,
                    std::io::Error::new(std::io::ErrorKind::NotFound, "no such file"),
                ));
            }
        }
        if let Some(p) = &self.robot {
            config.robot = load_robot(p)?;
        }
        if let Some(p) = &self.gait {
            config.gait = load_gait(p)?;
        }
        if let Some(d) = self.duration {
            if !(d.is_finite() && d > 0.0) {
                return Err(Error::InvalidConfig(format!(
                    "duration must be > 0, got {d}"
                )));
            }
            config.sim.duration = d;
        }
        if let Some(m) = self.sensor_mode {
            config.sim.sensor_mode = m;
        }
        if let Some(s) = self.seed {
            config.sim.seed = s;
        }
        config = config.with_overrides(&self.sets)?;
        config.validate()?;
        Ok(config)
    }

    fn check_sweep(&self) -> Result<&SweepAxis> {
        let axis = self
            .sweep
            .as_ref()
            .ok_or_else(|| Error::InvalidConfig("no sweep axis given".into()))?;
        if axis.values.is_empty() || axis.values.iter().any(|v| v.is_empty()) {
            return Err(Error::InvalidConfig(
                "sweep values must be non-empty".into(),
            ));
        }
        for v in &axis.values {
            if let Ok(x) = v.parse::<f64>() {
                if !x.is_finite() {
                    return Err(Error::InvalidConfig(format!(
                        "sweep value `{v}` is not finite"
                    )));
                }
            }
        }
        Ok(axis)
    }
}

pub fn exit_code<T>(result: &Result<T>) -> i32 {
    match result {
        Ok(_) => EXIT_OK,
        Err(e) if e.is_config_error() => EXIT_CONFIG,
        Err(_) => EXIT_NUMERICAL,
    }
}

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

fn summary_line(m: &Metrics) -> String {
    format!(
        "speed {:.3} m/s, hops {} ({} consecutive), stance {:.3} s, CoT {:.3}, saturated samples {}",
        m.speed, m.hops, m.max_consecutive_hops, m.mean_stance, m.cost_of_transport, m.saturated_samples
    )
}

/// Simulate, write `log.csv` and `metrics.toml` into `dir`, return metrics.
pub fn run_into(config: &RunConfig, dir: &Path) -> Result<Metrics> {
    let log = run_episode(config)?;
    create_dir(dir)?;
    log.write_csv(&dir.join("log.csv"))?;
    let metrics = summarize(&log);
    metrics.write_toml(config, &dir.join("metrics.toml"))?;
    Ok(metrics)
}

pub fn cmd_run(spec: &RunSpec, out: &mut dyn Write) -> Result<Metrics> {
    let config = spec.resolve()?;
    for w in config.report().warnings() {
        let _ = writeln!(out, "warning: {}: {}", w.rule, w.detail);
    }
    let metrics = run_into(&config, &spec.out_dir)?;
    let _ = writeln!(out, "{}", summary_line(&metrics));
    Ok(metrics)
}

/// One sweep point. A numerical failure is recorded, not propagated.
#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub value: String,
    pub dir: PathBuf,
    pub outcome: std::result::Result<Metrics, String>,
}

pub const TREND_COLUMNS: [&str; 11] = [
    "value",
    "status",
    "speed",
    "mean_stance",
    "mean_flight",
    "apex_height",
    "hops",
    "max_consecutive_hops",
    "cost_of_transport",
    "saturated_samples",
    "error",
];

/// Runs every value on a pool of `jobs` workers and writes one directory
/// per value plus `sweep_trend.csv`. Points come back in the given order.
pub fn cmd_sweep(
    spec: &RunSpec,
    jobs: Option<usize>,
    out: &mut dyn Write,
) -> Result<Vec<SweepPoint>> {
    let axis = spec.check_sweep()?;
    let base = spec.resolve()?;
    let configs = axis
        .values
        .iter()
        .map(|v| {
            base.with_overrides(&[format!("{}={v}", axis.param)])
                .and_then(|c| c.validate().map(|_| c))
        })
        .collect::<Result<Vec<_>>>()?;
    create_dir(&spec.out_dir)?;

    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = jobs {
        builder = builder.num_threads(n.max(1));
    }
    let pool = builder
        .build()
        .map_err(|e| Error::InvalidConfig(format!("cannot start worker pool: {e}")))?;
    let dirs: Vec<PathBuf> = axis
        .values
        .iter()
        .enumerate()
        .map(|(i, v)| spec.out_dir.join(format!("run_{i:02}_{}", sanitize(v))))
        .collect();
    let outcomes: Vec<Result<Metrics>> = pool.install(|| {
        configs
            .par_iter()
            .zip(dirs.par_iter())
            .map(|(c, d)| run_into(c, d))
            .collect()
    });

    let mut points = Vec::with_capacity(outcomes.len());
    for ((value, dir), outcome) in axis.values.iter().zip(dirs).zip(outcomes) {
        let outcome = match outcome {
            Ok(m) => Ok(m),
            Err(e) if e.is_config_error() => return Err(e),
            Err(e) => Err(e.to_string()),
        };
        let _ = match &outcome {
            Ok(m) => writeln!(out, "{}={value}: {}", axis.param, summary_line(m)),
            Err(e) => writeln!(out, "{}={value}: failed: {e}", axis.param),
        };
        points.push(SweepPoint {
            value: value.clone(),
            dir,
            outcome,
        });
    }
    let path = spec.out_dir.join("sweep_trend.csv");
    fs::write(&path, trend_csv(&base, &axis.param, &points)?).map_err(|e| Error::io(&path, e))?;
    let _ = writeln!(out, "trend table: {}", path.display());
    Ok(points)
}

fn sanitize(value: &str) -> String {
    value
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '.' || c == '-' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

fn trend_csv(base: &RunConfig, param: &str, points: &[SweepPoint]) -> Result<String> {
    let mut text = String::new();
    text.push_str("# gantry-hopper sweep trend\n");
    text.push_str(&format!("# schema_version = {SCHEMA_VERSION}\n"));
    text.push_str(&format!("# swept parameter: {param}\n"));
    for line in base.to_toml()?.lines() {
        text.push_str(&format!("# {line}\n"));
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::InvalidConfig(format!("csv: {e}"));
    w.write_record(TREND_COLUMNS).map_err(csv_err)?;
    for p in points {
        let record: Vec<String> = match &p.outcome {
            Ok(m) => vec![
                p.value.clone(),
                format!("{:?}", m.status).to_lowercase(),
                m.speed.to_string(),
                m.mean_stance.to_string(),
                m.mean_flight.to_string(),
                m.apex_height.to_string(),
                m.hops.to_string(),
                m.max_consecutive_hops.to_string(),
                m.cost_of_transport.to_string(),
                m.saturated_samples.to_string(),
                String::new(),
            ],
            Err(e) => {
                let mut r = vec![p.value.clone(), "failed".to_string()];
                r.extend(std::iter::repeat_n(String::new(), TREND_COLUMNS.len() - 3));
                r.push(e.clone());
                r
            }
        };
        w.write_record(&record).map_err(csv_err)?;
    }
    let body = w
        .into_inner()
        .map_err(|e| Error::InvalidConfig(e.to_string()))?;
    text.push_str(&String::from_utf8(body).expect("csv output is utf-8"));
    Ok(text)
}

/// Prints the report. Rule failures are returned as `InvalidConfig`.
pub fn cmd_validate(path: &Path, out: &mut dyn Write) -> Result<Report> {
    let (kind, report) = validate_file(path)?;
    let _ = writeln!(out, "{} ({} file)", path.display(), kind.as_str());
    let _ = write!(out, "{report}");
    let fails = report.failures().count();
    let warns = report.warnings().count();
    let _ = writeln!(
        out,
        "{} rules, {fails} failed, {warns} warnings",
        report.checks.len()
    );
    if fails > 0 {
        return Err(Error::InvalidConfig(format!(
            "{} failed {fails} rule(s)",
            path.display()
        )));
    }
    Ok(report)
}

/// Prints per-column deviations. `Ok(false)` when beyond `tol`.
pub fn cmd_compare(a: &Path, b: &Path, tol: f64, out: &mut dyn Write) -> Result<bool> {
    let report = compare_logs(&LogTable::read(a)?, &LogTable::read(b)?)?;
    for c in &report.columns {
        let unit = if c.numeric {
            "max abs"
        } else {
            "differing rows"
        };
        let _ = writeln!(out, "{:<12} {unit} {}", c.column, c.max_abs);
    }
    if let Some((na, nb)) = report.row_count_mismatch {
        let _ = writeln!(out, "row counts differ: {na} vs {nb}");
    }
    let ok = report.within(tol);
    let _ = writeln!(
        out,
        "{} rows, max numeric deviation {} ({} tolerance {tol})",
        report.rows,
        report.max_numeric_deviation(),
        if ok { "within" } else { "beyond" }
    );
    Ok(ok)
}

/// Parses `args` (program name first), runs the command and returns the
/// exit status. Errors are printed to `err`.
pub fn main_with_args<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = if e.use_stderr() {
                write!(err, "{e}")
            } else {
                write!(out, "{e}")
            };
            return code;
        }
    };
    let code = match cli.command {
        Command::Run(a) => {
            let r = cmd_run(&a.into(), out);
            report_error(&r, err)
        }
        Command::Sweep(a) => {
            let jobs = a.jobs;
            let r = cmd_sweep(&a.into(), jobs, out);
            let failed = matches!(&r, Ok(points) if points.iter().any(|p| p.outcome.is_err()));
            match report_error(&r, err) {
                EXIT_OK if failed => EXIT_NUMERICAL,
                c => c,
            }
        }
        Command::Validate { file } => {
            let r = cmd_validate(&file, out);
            report_error(&r, err)
        }
        Command::Compare { a, b, tol } => match cmd_compare(&a, &b, tol, out) {
            Ok(true) => EXIT_OK,
            Ok(false) => EXIT_DIFFERENT,
            r => report_error(&r, err),
        },
    };
    let _ = out.flush();
    code
}

fn report_error<T>(r: &Result<T>, err: &mut dyn Write) -> i32 {
    if let Err(e) = r {
        let _ = writeln!(err, "error: {e}");
    }
    exit_code(r)
}
