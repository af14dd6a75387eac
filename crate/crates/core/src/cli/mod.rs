//! Command-line front end: JSON configs in, JSON or CSV out.

pub mod commands;
pub mod config;
pub mod output;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use commands::{execute, Outcome};
pub use config::RunConfig;

use crate::error::{Error, Result};
use config::{evenly_spaced, MAX_PROBABILITY};

/// Environment variable capping the worker pool size.
pub const THREADS_ENV: &str = "LIEGAUSS_THREADS";

#[derive(Debug, Parser)]
#[command(name = "liegauss", version, about = "Normal quantum channels, equivalence classes and distillation sweeps")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// JSON run configuration; its `command` must match the subcommand.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Output file (stdout if absent).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Base seed for validate; check i uses seed + i.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Random-walk samples per check (validate).
    #[arg(long, global = true)]
    pub samples: Option<usize>,

    /// Random-walk steps per sample (validate).
    #[arg(long, global = true)]
    pub steps: Option<usize>,

    /// Largest logarithm branch index (equiv-scan).
    #[arg(long, global = true)]
    pub kmax: Option<u32>,

    /// Simplex subdivisions (equiv-scan), trace points (eig-trace) or
    /// number of evenly spaced p in [0, 1/4] (distill).
    #[arg(long, global = true)]
    pub grid: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Pauli transfer matrix of a channel, optionally with its Choi matrix.
    Ptm,
    /// Choi matrix of a channel.
    Choi,
    /// Equivalence-class sizes over diagonal diffusion matrices with unit trace.
    EquivScan,
    /// Generator eigenvalues as the drift magnitude grows.
    EigTrace,
    /// Fidelity table of the two-round distillation protocol.
    Distill,
    /// Random-walk checks of the closed-form transfer matrices.
    Validate,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Self::Ptm => "ptm",
            Self::Choi => "choi",
            Self::EquivScan => "equiv-scan",
            Self::EigTrace => "eig-trace",
            Self::Distill => "distill",
            Self::Validate => "validate",
        }
    }

    pub fn default_config(self) -> RunConfig {
        match self {
            Self::Ptm => RunConfig::Ptm(Default::default()),
            Self::Choi => RunConfig::Choi(Default::default()),
            Self::EquivScan => RunConfig::EquivScan(Default::default()),
            Self::EigTrace => RunConfig::EigTrace(Default::default()),
            Self::Distill => RunConfig::Distill(Default::default()),
            Self::Validate => RunConfig::Validate(Default::default()),
        }
    }
}

fn unused_flag(flag: &str, command: &str) -> Error {
    Error::Config { field: flag.into(), message: format!("not used by `{command}`") }
}

/// Reads the config (or the subcommand default) and applies flag overrides.
pub fn load_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            let cfg = RunConfig::from_json(&text)?;
            if cfg.name() != cli.command.name() {
                return Err(Error::Config {
                    field: "command".into(),
                    message: format!("config is for `{}` but the subcommand is `{}`", cfg.name(), cli.command.name()),
                });
            }
            cfg
        }
        None => cli.command.default_config(),
    };
    let name = cfg.name();
    match &mut cfg {
        RunConfig::Validate(c) => {
            c.seed = cli.seed.unwrap_or(c.seed);
            c.samples = cli.samples.unwrap_or(c.samples);
            c.steps = cli.steps.unwrap_or(c.steps);
        }
        _ => {
            for (flag, set) in [("--seed", cli.seed.is_some()), ("--samples", cli.samples.is_some()), ("--steps", cli.steps.is_some())] {
                if set {
                    return Err(unused_flag(flag, name));
                }
            }
        }
    }
    match (&mut cfg, cli.kmax) {
        (RunConfig::EquivScan(c), Some(k)) => c.k_max = k,
        (_, Some(_)) => return Err(unused_flag("--kmax", name)),
        _ => {}
    }
    match (&mut cfg, cli.grid) {
        (RunConfig::EquivScan(c), Some(n)) => c.grid = n,
        (RunConfig::EigTrace(c), Some(n)) => c.points = n,
        (RunConfig::Distill(c), Some(n)) => {
            if n < 2 {
                return Err(Error::Config { field: "--grid".into(), message: "must be at least 2".into() });
            }
            c.p_values = evenly_spaced(0.0, MAX_PROBABILITY, n);
        }
        (_, Some(_)) => return Err(unused_flag("--grid", name)),
        _ => {}
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Builds the global worker pool from `LIEGAUSS_THREADS`, if set.
pub fn configure_threads() -> Result<()> {
    let Ok(value) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| Error::Config { field: THREADS_ENV.into(), message: format!("expected a positive integer, got `{value}`") })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::Config { field: THREADS_ENV.into(), message: e.to_string() })
}

/// Loads, executes and writes the output; returns whether all checks passed.
pub fn run(cli: &Cli) -> Result<bool> {
    let cfg = load_config(cli)?;
    let outcome = execute(&cfg)?;
    match &cli.out {
        Some(path) => std::fs::write(path, &outcome.text)?,
        None => {
            use std::io::Write;
            std::io::stdout().lock().write_all(outcome.text.as_bytes())?;
        }
    }
    Ok(outcome.success)
}
