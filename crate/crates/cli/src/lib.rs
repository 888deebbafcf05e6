//! Command-line front end: argument handling, dispatch and report writing.
//!
//! Exit status: 0 success, 1 unreadable or unparsable input, 2 invalid sponge
//! or unsupported sponge type, 3 box or enumeration budget exceeded, 4 a
//! checked property failed (the report is still written).

mod commands;
pub mod format;
pub mod generate;

use clap::{Parser, ValueEnum};
use sponge_dims::rational::parse_rational;
use sponge_dims::Rational;
use std::fs;
use std::io::Write;
use std::path::PathBuf;
use thiserror::Error;

pub const DEFAULT_SEED: u64 = 0;
pub const DEFAULT_TRIALS: usize = 10_000;
pub const DEFAULT_BUDGET: u64 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    /// Check a sponge file and list violations and warnings.
    Validate,
    /// Assouad and lower dimensions.
    Dims,
    /// Cluster-wise against per-coordinate formula, with the dimension drop.
    Compare,
    /// Sample measure ratios of approximate cubes against both bounds.
    MeasureCheck,
    /// Zoomed-cube containment and Hausdorff convergence of weak tangents.
    Tangent,
    /// Count sub-cubes and fit scaling exponents.
    Oracle,
    /// Write pre-fractal boxes to files.
    ExportGeometry,
    /// Write a random Bedford–McMullen sponge file.
    Generate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum OutputFormat {
    #[default]
    Text,
    Json,
    Csv,
}

/// Everything a single invocation needs.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub input: Option<PathBuf>,
    /// Report file, or the target directory for `export-geometry`.
    pub output: Option<PathBuf>,
    pub seed: u64,
    pub trials: usize,
    /// Refinement levels for `oracle`, pre-fractal depths for `export-geometry`.
    pub depths: Option<Vec<usize>>,
    /// Scales `R` for `tangent`.
    pub scales: Option<Vec<Rational>>,
    pub budget: u64,
    pub format: OutputFormat,
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        Self {
            command,
            input: None,
            output: None,
            seed: DEFAULT_SEED,
            trials: DEFAULT_TRIALS,
            depths: None,
            scales: None,
            budget: DEFAULT_BUDGET,
            format: OutputFormat::Text,
        }
    }

    pub fn with_input(mut self, path: impl Into<PathBuf>) -> Self {
        self.input = Some(path.into());
        self
    }

    pub fn with_format(mut self, format: OutputFormat) -> Self {
        self.format = format;
        self
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "sponge",
    version,
    about = "Assouad and lower dimensions of self-affine sponges"
)]
pub struct Cli {
    #[arg(value_enum)]
    pub command: Command,
    /// Sponge file (JSON).
    #[arg(long, short)]
    pub input: Option<PathBuf>,
    /// Report file; a directory for export-geometry.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_TRIALS as u64, value_parser = clap::value_parser!(u64).range(1..))]
    pub trials: u64,
    /// Comma-separated depths; `a..=b` expands to a range.
    #[arg(long, value_parser = parse_depth_list)]
    pub depths: Option<DepthList>,
    /// Comma-separated scales such as `3^-4,1/243`.
    #[arg(long, value_parser = parse_scale_list)]
    pub scales: Option<ScaleList>,
    #[arg(long, default_value_t = DEFAULT_BUDGET, value_parser = clap::value_parser!(u64).range(1..))]
    pub budget: u64,
    #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
    pub format: OutputFormat,
}

impl Cli {
    pub fn into_config(self) -> RunConfig {
        RunConfig {
            command: self.command,
            input: self.input,
            output: self.output,
            seed: self.seed,
            trials: self.trials as usize,
            depths: self.depths.map(|d| d.0),
            scales: self.scales.map(|s| s.0),
            budget: self.budget,
            format: self.format,
        }
    }
}

/// Wrappers so clap treats each list as one value.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthList(pub Vec<usize>);

#[derive(Debug, Clone, PartialEq)]
pub struct ScaleList(pub Vec<Rational>);

fn parse_depth_list(text: &str) -> Result<DepthList, String> {
    parse_depths(text).map(DepthList)
}

fn parse_scale_list(text: &str) -> Result<ScaleList, String> {
    parse_scales(text).map(ScaleList)
}

pub fn parse_depths(text: &str) -> Result<Vec<usize>, String> {
    let mut depths = Vec::new();
    for item in text.split(',').map(str::trim) {
        if let Some((lo, hi)) = item.split_once("..=") {
            let lo: usize = lo
                .trim()
                .parse()
                .map_err(|_| format!("bad depth range `{item}`"))?;
            let hi: usize = hi
                .trim()
                .parse()
                .map_err(|_| format!("bad depth range `{item}`"))?;
            if lo > hi {
                return Err(format!("empty depth range `{item}`"));
            }
            depths.extend(lo..=hi);
        } else {
            depths.push(item.parse().map_err(|_| format!("bad depth `{item}`"))?);
        }
    }
    Ok(depths)
}

pub fn parse_scales(text: &str) -> Result<Vec<Rational>, String> {
    text.split(',')
        .map(|item| {
            let value = parse_rational(item.trim()).map_err(|e| e.to_string())?;
            if value <= Rational::from_integer(0.into()) || value > Rational::from_integer(1.into())
            {
                return Err(format!("scale `{item}` is not in (0, 1]"));
            }
            Ok(value)
        })
        .collect()
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Budget(String),
    #[error("{0}")]
    Invariant(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) => 1,
            CliError::Validation(_) => 2,
            CliError::Budget(_) => 3,
            CliError::Invariant(_) => 4,
        }
    }
}

/// A finished report, possibly carrying a failed check.
pub(crate) struct Outcome {
    pub report: String,
    pub failure: Option<CliError>,
    /// Diagnostics for the error stream that are not failures.
    pub note: Option<String>,
}

impl Outcome {
    pub(crate) fn ok(report: String) -> Self {
        Self {
            report,
            failure: None,
            note: None,
        }
    }
}

/// Runs one command, writing the report to `--output` or `out` and
/// diagnostics to `err`. Returns the process exit status.
pub fn run(config: &RunConfig, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let outcome = match commands::dispatch(config) {
        Ok(outcome) => outcome,
        Err(error) => {
            let _ = writeln!(err, "error: {error}");
            return error.exit_code();
        }
    };
    let to_file = config.command != Command::ExportGeometry;
    let written = match (&config.output, to_file) {
        (Some(path), true) => fs::write(path, &outcome.report)
            .map_err(|e| format!("cannot write {}: {e}", path.display())),
        _ => out
            .write_all(outcome.report.as_bytes())
            .map_err(|e| format!("cannot write report: {e}")),
    };
    if let Err(message) = written {
        let _ = writeln!(err, "error: {message}");
        return 1;
    }
    if let Some(note) = outcome.note {
        let _ = writeln!(err, "{note}");
    }
    match outcome.failure {
        Some(failure) => {
            let _ = writeln!(err, "error: {failure}");
            failure.exit_code()
        }
        None => 0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn depth_lists() {
        assert_eq!(parse_depths("4..=7").unwrap(), vec![4, 5, 6, 7]);
        assert_eq!(parse_depths("1, 3,5..=5").unwrap(), vec![1, 3, 5]);
        assert!(parse_depths("7..=4").is_err());
        assert!(parse_depths("x").is_err());
    }

    #[test]
    fn scale_lists() {
        let scales = parse_scales("3^-4,1/2, 0.25").unwrap();
        assert_eq!(scales[0], Rational::new(1.into(), 81.into()));
        assert_eq!(scales[2], Rational::new(1.into(), 4.into()));
        assert!(parse_scales("2").is_err());
        assert!(parse_scales("0").is_err());
    }

    #[test]
    fn flags_reach_the_config() {
        let cli = Cli::try_parse_from([
            "sponge", "oracle", "--input", "a.json", "--depths", "4..=6", "--format", "csv",
            "--seed", "9",
        ])
        .unwrap();
        let config = cli.into_config();
        assert_eq!(config.command, Command::Oracle);
        assert_eq!(config.depths, Some(vec![4, 5, 6]));
        assert_eq!(config.format, OutputFormat::Csv);
        assert_eq!(config.seed, 9);
        assert_eq!(config.budget, DEFAULT_BUDGET);
        assert!(Cli::try_parse_from(["sponge", "measure-check", "--budget", "0"]).is_err());
    }
}
