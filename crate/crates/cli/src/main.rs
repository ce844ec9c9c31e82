//! `schedsim`: run, compare and reproduce CPU scheduling simulations.
//!
//! Exit codes: 0 success, 1 invariant failure or reference mismatch, 2 usage
//! or input error.

mod commands;
mod reproduce;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use schedsim_core::Tick;

use crate::reproduce::TableId;

#[derive(Debug, Parser)]
#[command(name = "schedsim", version, about = "Deterministic CPU scheduling simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one scheduler (or all four) over a workload.
    Run(RunArgs),
    /// Run all four schedulers and print the comparison matrix.
    Compare(CompareArgs),
    /// Write a seeded random workload file.
    Generate(GenerateArgs),
    /// Recompute a reference table and diff it cell by cell.
    Reproduce(ReproduceArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AlgoChoice {
    Fcfs,
    Sjf,
    Rr,
    Omdrrs,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Table,
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FileFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Args)]
#[group(id = "source", required = true, multiple = false)]
pub struct SourceArgs {
    /// Workload file (`pid,burst` CSV or JSON array).
    #[arg(long, group = "source", value_name = "PATH")]
    pub workload: Option<PathBuf>,
    /// Generate the workload instead: `count=N,min=N,max=N,seed=N`.
    #[arg(long, group = "source", value_name = "SPEC")]
    pub generate: Option<String>,
    /// Format of --workload; inferred from the extension when omitted.
    #[arg(long, value_enum)]
    pub input_format: Option<FileFormat>,
}

#[derive(Debug, Clone, Args)]
pub struct SchedArgs {
    /// Round Robin time quantum.
    #[arg(long = "q", value_name = "TICKS")]
    pub q: Option<Tick>,
    /// Initial quantum of the dynamic scheduler.
    #[arg(long = "k", value_name = "TICKS")]
    pub k: Option<Tick>,
    /// Quantum growth factor of the dynamic scheduler.
    #[arg(long = "F", value_name = "FACTOR", default_value_t = schedsim_core::algorithms::DEFAULT_FACTOR)]
    pub factor: Tick,
    /// Draw missing quanta uniformly from [2, max burst] with this seed.
    #[arg(long, value_name = "SEED")]
    pub quantum_seed: Option<u64>,
    #[arg(long, value_enum, env = "SCHEDSIM_FORMAT", default_value = "table")]
    pub format: OutputFormat,
    /// Append a Gantt chart per scheduler (table output only).
    #[arg(long)]
    pub gantt: bool,
    /// Gantt chart width in columns (minimum 20).
    #[arg(long, default_value_t = 72)]
    pub width: usize,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long, value_enum)]
    pub algo: AlgoChoice,
    #[command(flatten)]
    pub source: SourceArgs,
    #[command(flatten)]
    pub sched: SchedArgs,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[command(flatten)]
    pub sched: SchedArgs,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long)]
    pub count: usize,
    #[arg(long, default_value_t = schedsim_core::workload::DEFAULT_BURST_MIN)]
    pub min: Tick,
    #[arg(long, default_value_t = schedsim_core::workload::DEFAULT_BURST_MAX)]
    pub max: Tick,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output file; stdout when omitted.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: FileFormat,
}

#[derive(Debug, Args)]
pub struct ReproduceArgs {
    #[arg(value_enum)]
    pub table: TableId,
    #[arg(long, value_enum, env = "SCHEDSIM_FORMAT", default_value = "table")]
    pub format: OutputFormat,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => commands::cmd_run(args.algo, &args.source, &args.sched),
        Command::Compare(args) => commands::cmd_run(AlgoChoice::All, &args.source, &args.sched),
        Command::Generate(args) => commands::cmd_generate(&args),
        Command::Reproduce(args) => commands::cmd_reproduce(args.table, args.format),
    };
    match result {
        Ok(output) => {
            print!("{output}");
            ExitCode::SUCCESS
        }
        Err(err) => {
            if let Some(output) = err.output() {
                print!("{output}");
            }
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}
