use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

mod commands;

/// Best approximation pairs between intersections of convex sets.
#[derive(Debug, Parser)]
#[command(name = "ashlwb", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Overrides shared by the solver commands.
#[derive(Debug, Clone, clap::Args)]
pub struct Overrides {
    /// Starting point, comma separated (default: origin)
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    x0: Option<Vec<f64>>,
    /// Pair-gap tolerance of the termination test
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_sweeps: Option<usize>,
    /// Steering schedule `c,k0,p` for both families
    #[arg(long, value_delimiter = ',')]
    schedule: Option<Vec<f64>>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FamilyArg {
    A,
    B,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run A-S-HLWB; print the summary and optionally write trace.csv and summary.json
    Run {
        problem: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
        /// Output directory
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Project a point onto one family's intersection with S-HLWB
    Project {
        problem: PathBuf,
        #[arg(long, value_enum, ignore_case = true)]
        family: FamilyArg,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        point: Vec<f64>,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
    /// Validate the problem and run the verification checks
    Check {
        problem: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Brute-force grid oracle (dimension <= 3)
    Oracle {
        problem: PathBuf,
        #[arg(long, default_value_t = 0.01)]
        resolution: f64,
    },
    /// Compare A-S-HLWB, Cheney-Goldstein and the oracle
    Compare {
        problem: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
        #[arg(long, default_value_t = 0.01)]
        resolution: f64,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // usage errors share the validation exit code; 2 means MaxSweeps
            return ExitCode::from(if e.use_stderr() {
                commands::EXIT_INVALID
            } else {
                0
            });
        }
    };
    let code = match cli.command {
        Command::Run {
            problem,
            overrides,
            out,
        } => commands::run(&problem, &overrides, out.as_deref()),
        Command::Project {
            problem,
            family,
            point,
            tol,
        } => commands::project(&problem, family, &point, tol),
        Command::Check { problem, seed } => commands::check(&problem, seed),
        Command::Oracle {
            problem,
            resolution,
        } => commands::oracle(&problem, resolution),
        Command::Compare {
            problem,
            overrides,
            resolution,
        } => commands::compare(&problem, &overrides, resolution),
    };
    ExitCode::from(code)
}
