mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::commands::Failure;

#[derive(Debug, Parser)]
#[command(name = "transit-design", version, about = "Stop-pattern, headway and fleet design for transit lines")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check a scenario file and list rule violations
    Validate(Common),
    /// Build and solve the design model, then write plan and metrics
    Solve(Common),
    /// Price a fixed plan with the flow evaluator
    Evaluate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        plan: PathBuf,
    },
    /// Solve and compare against a baseline plan
    Compare {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        baseline: PathBuf,
    },
    /// Solve and certify the optimum by exhaustive enumeration (toy sizes only)
    Oracle(Common),
    /// Write the model in LP format with its statistics
    Export(Common),
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    #[arg(long)]
    pub scenario: PathBuf,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    #[arg(long, default_value_t = 3600.0)]
    pub time_limit: f64,
    #[arg(long, default_value_t = 0.0)]
    pub gap: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, env = "TRANSIT_DESIGN_BACKEND", default_value = "highs")]
    pub backend: String,
    #[arg(long)]
    pub no_transfers: bool,
    #[arg(long)]
    pub symmetry: bool,
    #[arg(long)]
    pub capacity: bool,
    #[arg(long)]
    pub full_pattern: bool,
    #[arg(long)]
    pub integer_fleet: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Validate(c) => commands::validate(c),
        Command::Solve(c) => commands::solve(c),
        Command::Evaluate { common, plan } => commands::evaluate(common, plan),
        Command::Compare { common, baseline } => commands::compare(common, baseline),
        Command::Oracle(c) => commands::oracle(c),
        Command::Export(c) => commands::export(c),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {:#}", failure.error);
            ExitCode::from(failure.code())
        }
    }
}

impl Failure {
    fn code(&self) -> u8 {
        self.kind as u8
    }
}
