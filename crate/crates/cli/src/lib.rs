//! `rothe-px`: configs, the bundled problem registry, result files and the `verify` suites.

// `!(x > 0)` is the NaN-rejecting form used for argument checks
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod emit;
pub mod expr;
pub mod registry;
pub mod verify;

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use thiserror::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVARIANT: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("I/O error: {0}")]
    Io(String),
    #[error("solver failure: {0}")]
    Solver(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) | Self::Io(_) => EXIT_CONFIG,
            Self::Solver(_) => EXIT_SOLVER,
        }
    }
}

impl From<rothe_px_core::Error> for CliError {
    fn from(e: rothe_px_core::Error) -> Self {
        match e {
            rothe_px_core::Error::SolverFailure { .. } => Self::Solver(e.to_string()),
            _ => Self::Config(e.to_string()),
        }
    }
}

/// What a finished command found: invariant violations and a solver failure that still left
/// partial output behind.
#[derive(Debug, Default)]
pub struct Outcome {
    pub failures: Vec<String>,
    pub solver_failure: Option<String>,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.solver_failure.is_some() {
            EXIT_SOLVER
        } else if !self.failures.is_empty() {
            EXIT_INVARIANT
        } else {
            EXIT_OK
        }
    }

    pub fn check(&mut self, holds: bool, what: impl FnOnce() -> String) {
        if !holds {
            self.failures.push(what());
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "rothe-px", version, about = "Rothe time stepping for the p(x)-Laplacian heat equation")]
pub struct Cli {
    /// JSON run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Bundled problem id, used when no --config is given.
    #[arg(long, global = true)]
    pub problem: Option<String>,
    /// Output directory.
    #[arg(long, global = true, default_value = "rothe-px-out")]
    pub out: PathBuf,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BarrierKindArg {
    TwoSided,
    Lower,
    Upper,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Norms,
    Simon,
    Assembly,
    Resolvent,
    Rothe,
    Stabilization,
    All,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Torsion or resolvent problem: solution.csv, report.json.
    Elliptic,
    /// Rothe run: timeseries.csv, snapshot_<n>.csv, run.json.
    Parabolic,
    /// Stationary problem: steady_state.csv, report.json.
    Steady,
    /// Long-time run against the steady state: stabilization.csv, steady_state.csv, run.json.
    Stabilize,
    /// Barrier ODE v' = L(v): barrier.csv, run.json.
    Barrier {
        /// One of zero, one, linear, affine, quadratic, cubic, quartic.
        #[arg(long)]
        growth: String,
        #[arg(long)]
        kappa: f64,
        #[arg(long = "T")]
        horizon: f64,
        #[arg(long)]
        dt: f64,
        #[arg(long, value_enum, default_value = "two-sided")]
        kind: BarrierKindArg,
    },
    /// Step-halving comparison: cauchy.csv, run.json.
    Cauchy {
        #[arg(long)]
        refinements: Option<usize>,
    },
    /// Invariant suites: verify.json.
    Verify {
        #[arg(long, value_enum, default_value = "all")]
        suite: Suite,
        /// Flips the sign of the Hölder constant; the norms suite must then fail.
        #[arg(long)]
        expect_fail: bool,
    },
}

/// Runs a parsed command line and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    match commands::dispatch(&cli) {
        Ok(outcome) => {
            for f in &outcome.failures {
                eprintln!("invariant failed: {f}");
            }
            if let Some(s) = &outcome.solver_failure {
                eprintln!("solver failure: {s}");
            }
            outcome.exit_code()
        }
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}
