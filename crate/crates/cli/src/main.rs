use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod manifest;

/// Conical Chaplygin-gas flow past a diamond wing.
#[derive(Debug, Parser)]
#[command(name = "chaplygin", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the full continuation, check the final solution and export it.
    Solve(CommonArgs),
    /// Run the solver-free consistency checks and print a table.
    Verify(CommonArgs),
    /// Run the continuation and record the vanishing-viscosity Cauchy deltas.
    Sweep(CommonArgs),
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// Problem configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Override the grid with an N x N mesh.
    #[arg(long, value_name = "N")]
    grid: Option<usize>,
    /// Seed for the randomized checks.
    #[arg(long, value_name = "K", default_value_t = 0)]
    seed: u64,
}

/// Process exit statuses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Ok = 0,
    ConfigError = 2,
    SolverFailure = 3,
    ChecksFailed = 4,
}

impl From<Status> for ExitCode {
    fn from(status: Status) -> Self {
        ExitCode::from(status as u8)
    }
}

fn init_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var("CHAPLYGIN_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("CHAPLYGIN_THREADS = {raw:?} is not a positive integer"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(msg) = init_threads() {
        eprintln!("error: {msg}");
        return Status::ConfigError.into();
    }
    let status = match cli.command {
        Command::Solve(args) => commands::solve(&args),
        Command::Verify(args) => commands::verify(&args),
        Command::Sweep(args) => commands::sweep(&args),
    };
    status.into()
}
