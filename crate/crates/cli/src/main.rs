// `!(x > 0.0)` rejects NaN on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod error;
mod output;
mod reproduce;
mod schema;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::commands::SolveMethod;
use crate::error::{CliError, CliResult};
use crate::reproduce::ReproOptions;

#[derive(Debug, Parser)]
#[command(name = "persuade", version, about = "Multi-receiver Bayesian persuasion solvers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compute the value and an optimal family or certificate.
    Solve {
        #[arg(long)]
        problem: PathBuf,
        /// primal, dual, dual-binary, one-state or supermodular.
        #[arg(long, default_value = "primal")]
        method: String,
        /// Lattice resolution for the grid methods.
        #[arg(long, default_value_t = 50)]
        grid: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a conditional belief family; exit 1 when infeasible.
    Feasible {
        /// Family file.
        #[arg(long)]
        problem: PathBuf,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Verify a dual certificate; exit 1 when a violation exceeds the tolerance.
    Certify {
        #[arg(long)]
        problem: PathBuf,
        /// Certificate file; the builtin closed form when omitted.
        #[arg(long)]
        certificate: Option<PathBuf>,
        #[arg(long, default_value_t = 2001)]
        samples: usize,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve a multi-marginal transport problem.
    Transport {
        #[arg(long)]
        problem: PathBuf,
        /// lp, assortative or auto.
        #[arg(long, default_value = "auto")]
        method: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Largest polarization exponent certified by the closed-form check.
    BetaMax {
        #[arg(long, default_value_t = 1e-4)]
        precision: f64,
        #[arg(long, default_value_t = 2001)]
        samples: usize,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the worked cases and compare with their expected values.
    Reproduce {
        /// morale, duopoly, polarization, retailer, discord, public-option, example1 or all.
        #[arg(long, default_value = "all")]
        case: String,
        #[arg(long, default_value_t = 50)]
        grid: usize,
        #[arg(long, default_value_t = 1e-4)]
        precision: f64,
        #[arg(long, default_value_t = 2001)]
        samples: usize,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        /// Directory for the JSON report and CSV plot data.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> CliResult<u8> {
    match cli.command {
        Command::Solve {
            problem,
            method,
            grid,
            out,
        } => commands::solve(&problem, SolveMethod::parse(&method)?, grid, out.as_deref()),
        Command::Feasible { problem, tol, out } => commands::feasible(&problem, tol, out.as_deref()),
        Command::Certify {
            problem,
            certificate,
            samples,
            tol,
            out,
        } => commands::certify(&problem, certificate.as_deref(), samples, tol, out.as_deref()),
        Command::Transport { problem, method, out } => commands::transport(&problem, &method, out.as_deref()),
        Command::BetaMax {
            precision,
            samples,
            tol,
            out,
        } => commands::beta_max(precision, samples, tol, out.as_deref()),
        Command::Reproduce {
            case,
            grid,
            precision,
            samples,
            tol,
            out,
        } => reproduce::reproduce(
            &case,
            ReproOptions {
                grid,
                precision,
                samples,
                tol,
            },
            out.as_deref(),
        ),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { error::EXIT_INPUT } else { error::EXIT_OK });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(CliError::exit_code(&e))
        }
    }
}
