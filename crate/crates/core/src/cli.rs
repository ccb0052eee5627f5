//! Config parsing, CSV output and the commands behind the `mra-opt` binary.
//!
//! Config files are plain `key = value` lines with `#` comments. Lists are
//! comma separated. Angles may be written as multiples of pi, e.g. `pi/4`
//! or `3*pi/16`.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use thiserror::Error;

use crate::experiment::{aggregate, run_sweep, ExperimentConfig, SweepAxis, SweepResult};
use crate::validate;

/// CSV header written by `run` and `sweep`.
pub const CSV_HEADER: &str = "scheme,axis,axis_value,trial,sum_rate_bps_hz,iterations,converged";

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_VALIDATION: i32 = 3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("{0}")]
    Range(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    /// One point at the fixed SNR, region and rotation limit.
    Run,
    /// One CSV per configured sweep axis.
    Sweep,
    /// Fast invariant self-checks.
    Validate,
}

#[derive(Debug, Clone, Parser)]
#[command(name = "mra-opt", version, about = "Movable/rotatable antenna sum-rate experiments")]
pub struct Cli {
    pub command: Command,
    /// Path to a `key = value` config file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory for CSV files.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub trials: Option<usize>,
}

/// Experiment settings plus the CLI-only keys.
#[derive(Debug, Clone, PartialEq)]
pub struct CliConfig {
    pub experiment: ExperimentConfig,
    /// Axes written by `sweep`.
    pub axes: Vec<SweepAxis>,
    pub output_path: PathBuf,
}

impl Default for CliConfig {
    fn default() -> Self {
        Self {
            experiment: ExperimentConfig::default(),
            axes: SweepAxis::ALL.to_vec(),
            output_path: PathBuf::from("."),
        }
    }
}

/// Parses a real number, also accepting `pi`, `k*pi`, `kpi`, `pi/d` and `k*pi/d`.
pub fn parse_number(text: &str) -> Option<f64> {
    let t = text.trim();
    if let Ok(v) = t.parse::<f64>() {
        return Some(v);
    }
    let lower = t.to_ascii_lowercase();
    let (num, den) = match lower.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim().parse::<f64>().ok()?),
        None => (lower.as_str(), 1.0),
    };
    let coeff = num.strip_suffix("pi")?.trim().trim_end_matches('*').trim();
    let (sign, coeff) = match coeff.strip_prefix('-') {
        Some(rest) => (-1.0, rest.trim()),
        None => (1.0, coeff),
    };
    let k = if coeff.is_empty() { 1.0 } else { coeff.parse::<f64>().ok()? };
    Some(sign * k * std::f64::consts::PI / den)
}

fn parse_list(value: &str, line: usize) -> Result<Vec<f64>, ConfigError> {
    value
        .split(',')
        .map(|item| {
            parse_number(item).ok_or_else(|| ConfigError::Parse {
                line,
                message: format!("`{}` is not a number", item.trim()),
            })
        })
        .collect()
}

fn parse_scalar<T: std::str::FromStr>(value: &str, line: usize) -> Result<T, ConfigError> {
    value.parse::<T>().map_err(|_| ConfigError::Parse {
        line,
        message: format!("`{value}` is not a valid value"),
    })
}

fn parse_real(value: &str, line: usize) -> Result<f64, ConfigError> {
    parse_number(value).ok_or_else(|| ConfigError::Parse {
        line,
        message: format!("`{value}` is not a number"),
    })
}

/// Parses config text; absent keys keep their defaults.
pub fn parse_config(text: &str) -> Result<CliConfig, ConfigError> {
    let mut cfg = CliConfig::default();
    let mut seen = std::collections::HashSet::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| ConfigError::Parse {
            line,
            message: "expected `key = value`".into(),
        })?;
        let key = key.trim();
        let value = value.trim();
        if value.is_empty() {
            return Err(ConfigError::Parse {
                line,
                message: format!("`{key}` has no value"),
            });
        }
        if !seen.insert(key.to_string()) {
            return Err(ConfigError::Parse {
                line,
                message: format!("duplicate key `{key}`"),
            });
        }
        let e = &mut cfg.experiment;
        match key {
            "n_x" => e.n_x = parse_scalar(value, line)?,
            "n_z" => e.n_z = parse_scalar(value, line)?,
            "users" | "k" => e.users = parse_scalar(value, line)?,
            "paths" | "l" => e.paths = parse_scalar(value, line)?,
            "snr_db_list" => e.snr_db_list = parse_list(value, line)?,
            "r_list" => e.r_list = parse_list(value, line)?,
            "psi_max_list" => e.psi_max_list = parse_list(value, line)?,
            "fixed_snr_db" => e.fixed_snr_db = parse_real(value, line)?,
            "fixed_r" => e.fixed_r = parse_real(value, line)?,
            "fixed_psi_max" => e.fixed_psi_max = parse_real(value, line)?,
            "frequency_hz" => e.frequency_hz = parse_real(value, line)?,
            "trials" => e.trials = parse_scalar(value, line)?,
            "seed" => e.seed = parse_scalar(value, line)?,
            "max_iterations" => e.opts.max_iterations = parse_scalar(value, line)?,
            "tolerance" => e.opts.tolerance = parse_real(value, line)?,
            "axes" => {
                cfg.axes = value
                    .split(',')
                    .map(|a| a.trim().parse::<SweepAxis>().map_err(|message| ConfigError::Parse { line, message }))
                    .collect::<Result<_, _>>()?;
            }
            "output_path" => cfg.output_path = PathBuf::from(value),
            _ => {
                return Err(ConfigError::UnknownKey {
                    line,
                    key: key.to_string(),
                })
            }
        }
    }
    check_ranges(&cfg)?;
    Ok(cfg)
}

fn check_ranges(cfg: &CliConfig) -> Result<(), ConfigError> {
    cfg.experiment.validate().map_err(ConfigError::Range)?;
    if cfg.axes.is_empty() {
        return Err(ConfigError::Range("axes list is empty".into()));
    }
    if !(cfg.experiment.opts.tolerance > 0.0) {
        return Err(ConfigError::Range("tolerance must be positive".into()));
    }
    Ok(())
}

/// Renders `x` with `sig` significant digits, trailing zeros trimmed, switching
/// to exponent notation outside `[1e-5, 10^sig)`.
pub fn format_sig(x: f64, sig: usize) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:.*e}", sig - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    let trim = |s: &str| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s.to_string()
        }
    };
    if exp < -5 || exp >= sig as i32 {
        format!("{}e{}", trim(mantissa), exp)
    } else {
        let decimals = (sig as i32 - 1 - exp).max(0) as usize;
        trim(&format!("{:.*}", decimals, x))
    }
}

/// CSV body for a sweep, header included.
pub fn to_csv(result: &SweepResult) -> String {
    let mut out = String::with_capacity(64 * (result.rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in &result.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.scheme,
            r.axis,
            format_sig(r.axis_value, 9),
            r.trial,
            format_sig(r.sum_rate, 9),
            r.iterations,
            r.converged
        );
    }
    out
}

/// Writes through a temp file in the same directory and renames on success.
pub fn write_atomic(path: &Path, contents: &str) -> std::io::Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

fn summary(result: &SweepResult) -> String {
    let mut s = format!("{:<6}{:>14}{:>12}{:>10}\n", "scheme", result.axis.name(), "mean", "stderr");
    for a in aggregate(result) {
        let _ = writeln!(s, "{:<6}{:>14}{:>12.4}{:>10.4}", a.scheme.name(), format_sig(a.axis_value, 6), a.mean, a.std_error);
    }
    s
}

fn run_and_write(cfg: &CliConfig, runs: &[(SweepAxis, ExperimentConfig, &str)]) -> i32 {
    if let Err(e) = std::fs::create_dir_all(&cfg.output_path) {
        eprintln!("error: cannot create {}: {e}", cfg.output_path.display());
        return EXIT_IO;
    }
    for (axis, exp, file) in runs {
        let result = match run_sweep(exp, *axis) {
            Ok(r) => r,
            Err(e) => {
                eprintln!("error: {e}");
                return EXIT_CONFIG;
            }
        };
        let path = cfg.output_path.join(file);
        if let Err(e) = write_atomic(&path, &to_csv(&result)) {
            eprintln!("error: cannot write {}: {e}", path.display());
            return EXIT_IO;
        }
        println!("wrote {}", path.display());
        print!("{}", summary(&result));
    }
    EXIT_OK
}

/// Writes `sweep_<axis>.csv` for every configured axis.
pub fn cmd_sweep(cfg: &CliConfig) -> i32 {
    let runs: Vec<_> = cfg
        .axes
        .iter()
        .map(|&axis| (axis, cfg.experiment.clone(), sweep_file_name(axis)))
        .collect();
    let runs: Vec<_> = runs.iter().map(|(a, e, f)| (*a, e.clone(), f.as_str())).collect();
    run_and_write(cfg, &runs)
}

pub fn sweep_file_name(axis: SweepAxis) -> String {
    format!("sweep_{}.csv", axis.name())
}

/// Writes `run.csv` for the single point (fixed SNR, fixed r, fixed psi_max).
pub fn cmd_run(cfg: &CliConfig) -> i32 {
    let exp = ExperimentConfig {
        snr_db_list: vec![cfg.experiment.fixed_snr_db],
        ..cfg.experiment.clone()
    };
    run_and_write(cfg, &[(SweepAxis::Snr, exp, "run.csv")])
}

pub fn cmd_validate() -> i32 {
    let checks = validate::run_checks();
    for c in &checks {
        println!("{} {:<22} {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    validate::exit_code(&checks)
}

/// Resolves config file and flag overrides into a [`CliConfig`].
pub fn resolve_config(cli: &Cli) -> Result<CliConfig, String> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
            parse_config(&text).map_err(|e| format!("{}: {e}", path.display()))?
        }
        None => CliConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.experiment.seed = seed;
    }
    if let Some(trials) = cli.trials {
        cfg.experiment.trials = trials;
    }
    if let Some(out) = &cli.out {
        cfg.output_path = out.clone();
    }
    check_ranges(&cfg).map_err(|e| e.to_string())?;
    Ok(cfg)
}

/// Entry point shared by the binary and the tests; returns the exit code.
pub fn execute(cli: &Cli) -> i32 {
    if cli.command == Command::Validate {
        return cmd_validate();
    }
    let cfg = match resolve_config(cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    match cli.command {
        Command::Run => cmd_run(&cfg),
        Command::Sweep => cmd_sweep(&cfg),
        Command::Validate => unreachable!(),
    }
}
