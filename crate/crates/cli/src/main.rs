use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod output;

use output::Failure;

/// Boolean-function analysis of subpopulations, graph invariants and
/// circuit-aware fair GNN training.
#[derive(Debug, Parser)]
#[command(name = "sbf", version)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Global {
    /// Seed for commands that draw random numbers.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output file, or output directory for `train` and `synth`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

impl Format {
    pub fn name(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Spectral report for a truth table or circuit.
    Analyze(commands::AnalyzeArgs),
    /// Decide whether two truth tables differ by a variable permutation.
    Subiso(commands::SubisoArgs),
    /// Compare canonical-form isomorphism with search on encoded graphs.
    Reduce(commands::ReduceArgs),
    /// Invariant summary of one graph, or the hierarchy table for two.
    Invariants(commands::InvariantsArgs),
    /// Stable 1-WL colors of a graph.
    Wl(commands::WlArgs),
    /// Train a GNN with the circuit fairness penalty.
    Train(commands::TrainArgs),
    /// Fairness report for existing predictions or a saved model.
    Audit(commands::AuditArgs),
    /// Write the synthetic biased graph.
    Synth(commands::SynthArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(Failure { code, msg }) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}
