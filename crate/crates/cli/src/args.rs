use std::ffi::OsString;
use std::path::PathBuf;

use clap::{ArgAction, Parser, Subcommand};

/// Scaling-model laboratory: growth laws, semi-modular search, pheromone
/// foraging, and small-world routing, with seed-reproducible experiments.
#[derive(Debug, Parser)]
#[command(name = "radar", version, about)]
pub struct Cli {
    /// Seed override; the same seed always reproduces the same CSVs.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Output directory (default: $RADAR_OUT, then ./out).
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,

    /// Parameter override as dotted.path=value; repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE", action = ArgAction::Append)]
    pub set: Vec<String>,

    /// JSON config file merged over the defaults before --set overrides.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Verbosity; at -v the effective parameter tree is echoed.
    #[arg(short, long, global = true, action = ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, PartialEq, Subcommand)]
pub enum Command {
    /// List registered experiments.
    List,
    /// Run a registered experiment and evaluate its expectations.
    Run {
        /// Experiment name, as printed by `list`.
        experiment: String,
    },
    /// Semi-modular architecture model.
    Immune {
        #[command(subcommand)]
        mode: ImmuneMode,
    },
    /// Pheromone foraging simulation.
    Ants {
        #[command(subcommand)]
        mode: AntsMode,
    },
    /// Small-world greedy routing.
    Smallworld {
        #[command(subcommand)]
        mode: SmallworldMode,
    },
    /// Growth ODE integration.
    Growth {
        #[command(subcommand)]
        mode: GrowthMode,
    },
    /// Log-log fit of a two-column CSV.
    Fit {
        /// CSV file with numeric x,y columns (one header line allowed).
        csv: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum ImmuneMode {
    /// Optimize module volume across system sizes and fit the exponents.
    Optimize,
    /// Run the detect-then-recruit simulation across system sizes.
    Des,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum AntsMode {
    /// Run foraging replicates and write the stats CSV.
    Run,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum SmallworldMode {
    /// Build graphs across sizes and fit mean greedy hops.
    Run,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum GrowthMode {
    /// Integrate the growth equation and export the trajectory.
    Run,
}

/// Fully resolved invocation: subcommand plus the cross-cutting options.
#[derive(Debug, Clone, PartialEq)]
pub struct CliConfig {
    pub command: Command,
    pub config_path: Option<PathBuf>,
    pub overrides: Vec<(String, serde_json::Value)>,
    pub output_dir: PathBuf,
    pub seed: Option<u64>,
    pub verbosity: u8,
}

/// Errors produced while resolving arguments, all mapped to exit code 2.
#[derive(Debug)]
pub enum ParseError {
    Clap(clap::Error),
    Usage(String),
}

impl std::fmt::Display for ParseError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ParseError::Clap(e) => e.fmt(f),
            ParseError::Usage(m) => write!(f, "{m}"),
        }
    }
}

/// Parse argv into a [`CliConfig`].
///
/// `radar_out` is the `RADAR_OUT` fallback for the output directory;
/// precedence is `--out`, then the variable, then `./out`.
pub fn parse_args<I, T>(argv: I, radar_out: Option<String>) -> Result<CliConfig, ParseError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(ParseError::Clap)?;
    let mut overrides = Vec::with_capacity(cli.set.len());
    for raw in &cli.set {
        let (key, value) = raw
            .split_once('=')
            .ok_or_else(|| ParseError::Usage(format!("--set expects KEY=VALUE, got {raw:?}")))?;
        if key.is_empty() {
            return Err(ParseError::Usage(format!("--set expects a non-empty key in {raw:?}")));
        }
        overrides.push((key.to_string(), parse_override_value(value)));
    }
    let output_dir = cli
        .out
        .or_else(|| radar_out.filter(|s| !s.is_empty()).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    Ok(CliConfig {
        command: cli.command,
        config_path: cli.config,
        overrides,
        output_dir,
        seed: cli.seed,
        verbosity: cli.verbose,
    })
}

/// `--set` values are JSON when they parse as JSON, bare strings otherwise.
fn parse_override_value(raw: &str) -> serde_json::Value {
    serde_json::from_str(raw).unwrap_or_else(|_| serde_json::Value::String(raw.to_string()))
}
