//! `obstacle-dg`: single runs, convergence tables and invariant suites.

mod commands;
mod config;
mod error;
mod suites;

use std::fs;
use std::io;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{parse_override, RunConfig};
use error::CliError;

#[derive(Parser)]
#[command(name = "obstacle-dg", version, about = "DG solvers for the obstacle transport equation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation and report errors against the exact solution.
    Solve {
        #[arg(long)]
        config: String,
        /// `key=value`, dotted keys for nested fields; repeatable.
        #[arg(long = "override", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Error table over a list of resolutions.
    Convergence {
        #[arg(long)]
        config: String,
        /// Comma-separated, ascending, e.g. 80,160,320,640.
        #[arg(long)]
        grids: String,
        #[arg(long = "override", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Run a seeded invariant suite.
    Proptest {
        #[arg(long)]
        suite: String,
        #[arg(long, default_value_t = 20240517)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        cases: usize,
    },
}

fn load(path: &str, overrides: &[String]) -> Result<RunConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::validation("config", format!("cannot read {path}: {e}")))?;
    let parsed = overrides.iter().map(|o| parse_override(o)).collect::<Result<Vec<_>, _>>()?;
    RunConfig::from_json(&text, &parsed)
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Solve { config, overrides } => {
            let cfg = load(&config, &overrides)?;
            commands::solve(&cfg, io::stdout().lock())
        }
        Command::Convergence {
            config,
            grids,
            overrides,
        } => {
            let grids = commands::parse_grids(&grids)?;
            let cfg = load(&config, &overrides)?;
            commands::convergence(&cfg, &grids, io::stdout().lock())
        }
        Command::Proptest { suite, seed, cases } => {
            if cases == 0 {
                return Err(CliError::validation("cases", "must be positive".into()));
            }
            let report = suites::run(&suite, seed, cases).ok_or_else(|| {
                CliError::validation("suite", format!("unknown suite `{suite}`; available: {}", suites::SUITES.join(", ")))
            })?;
            if report.failures.is_empty() {
                println!("suite {suite} seed={seed} cases={cases}: PASS ({} checks)", report.checks);
                Ok(())
            } else {
                println!(
                    "suite {suite} seed={seed} cases={cases}: FAIL ({} of {} checks)",
                    report.failures.len(),
                    report.checks
                );
                for f in report.failures.iter().take(10) {
                    println!("  {f}");
                }
                Err(CliError::Runtime(format!("suite {suite} failed")))
            }
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
