//! `mprcap` command-line front end.
//!
//! Exit codes: 0 success, 1 malformed or missing input, 2 offered load
//! infeasible, 3 validation failure, 4 any other runtime error.

mod error;
mod grid;
mod manifest;
mod optimize;
mod output;
mod scenario;
mod simulate;
mod solve;
mod sweep;
mod validate;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::SystemTime;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::output::Outputs;
use crate::scenario::Overrides;

#[derive(Parser, Debug, Clone, Serialize, Deserialize)]
#[command(name = "mprcap", version, about = "Throughput, delay and capacity of exponential-backoff WLANs with multi-packet reception")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct Global {
    /// Scenario file (JSON).
    #[arg(long, global = true, value_name = "PATH")]
    pub scenario: Option<PathBuf>,
    /// Output directory; defaults to the current directory.
    #[arg(long, global = true, env = "MPRCAP_OUT_DIR", value_name = "DIR")]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Suppress the human-readable summary on stdout.
    #[arg(long, global = true)]
    pub quiet: bool,
    #[command(flatten)]
    pub overrides: Overrides,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Subcommand, Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Capacity report, plus delay statistics at the offered load.
    Solve(solve::SolveArgs),
    /// One row per grid point along load, backoff factor or reception capability.
    Sweep(sweep::SweepArgs),
    /// Run the slotted simulator, one CSV row per seed.
    Simulate(simulate::SimulateArgs),
    /// Backoff factor maximising the safe throughput.
    OptimizeR(optimize::OptimizeArgs),
    /// Optimal backoff factor and per-M safe throughput over a range of M.
    Scaling(optimize::ScalingArgs),
    /// Compare analytic and simulated delay, utilisation and attempt rate.
    Validate(validate::ValidateArgs),
    /// Re-run the invocation recorded in a manifest.
    Replay(ReplayArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Solve(_) => "solve",
            Command::Sweep(_) => "sweep",
            Command::Simulate(_) => "simulate",
            Command::OptimizeR(_) => "optimize-r",
            Command::Scaling(_) => "scaling",
            Command::Validate(_) => "validate",
            Command::Replay(_) => "replay",
        }
    }
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct ReplayArgs {
    /// Manifest written by an earlier run.
    #[arg(long, value_name = "PATH")]
    pub manifest: PathBuf,
}

/// What a subcommand produced. `failure` is reported after the manifest
/// has been written, so failed validations still leave a record.
#[derive(Debug, Default)]
pub struct Report {
    pub seeds: Vec<u64>,
    pub failure: Option<CliError>,
}

fn execute(mut cli: Cli, argv: Vec<String>) -> CliResult<()> {
    if let Command::Replay(args) = &cli.command {
        let recorded = manifest::load(&args.manifest)?;
        let mut inner = recorded.invocation;
        if let Command::Replay(_) = inner.command {
            return Err(CliError::Input("manifest records a replay; refusing to recurse".into()));
        }
        // output location and verbosity come from the replaying call
        inner.global.out = cli.global.out.clone().or(inner.global.out);
        inner.global.quiet = cli.global.quiet;
        return execute(inner, argv);
    }
    if let Some(p) = &cli.global.scenario {
        cli.global.scenario = Some(std::fs::canonicalize(p).unwrap_or_else(|_| p.clone()));
    }
    let started = SystemTime::now();
    let g = &cli.global;
    let mut out = Outputs::new(g.out.clone().unwrap_or_else(|| PathBuf::from(".")), g.format)?;
    let report = match &cli.command {
        Command::Solve(a) => solve::run(g, a, &mut out)?,
        Command::Sweep(a) => sweep::run(g, a, &mut out)?,
        Command::Simulate(a) => simulate::run(g, a, &mut out)?,
        Command::OptimizeR(a) => optimize::run_optimize(g, a, &mut out)?,
        Command::Scaling(a) => optimize::run_scaling(g, a, &mut out)?,
        Command::Validate(a) => validate::run(g, a, &mut out)?,
        Command::Replay(_) => unreachable!("handled above"),
    };
    let path = manifest::write(&cli, &out, &report.seeds, argv, started)?;
    if !g.quiet {
        for p in out.written() {
            println!("wrote {}", p.display());
        }
        println!("wrote {}", path.display());
    }
    match report.failure {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            // usage errors are input errors; --help and --version are not
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match execute(cli, argv) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
