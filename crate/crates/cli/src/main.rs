//! `subnet`: design combination matrices, run Monte-Carlo experiments and
//! evaluate the steady-state MSD predictions from a TOML experiment file.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::commands::CliError;

#[derive(Parser, Debug)]
#[command(name = "subnet", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Design one combination matrix per configured subspace.
    Design(Common),
    /// Simulate the configured strategies and write learning curves.
    Simulate(Common),
    /// Evaluate the closed-form and series MSD predictions.
    Theory(TheoryArgs),
    /// Theory and simulation side by side for every step size.
    Table2(Common),
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Experiment file (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output_dir` from the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Master seed; overrides `master_seed` from the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for the Monte-Carlo runs.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args, Debug, Clone)]
pub struct TheoryArgs {
    #[command(flatten)]
    common: Common,
    /// Combination matrix (M×M CSV without header) to evaluate instead of
    /// designing one; applies to the first configured p.
    #[arg(long)]
    matrix: Option<PathBuf>,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let common = match &cli.command {
        Command::Design(c) | Command::Simulate(c) | Command::Table2(c) => c,
        Command::Theory(t) => &t.common,
    };
    if let Some(n) = common.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(format!("cannot start {n} threads: {e}")))?;
    }
    let ctx = commands::Context::load(common)?;
    match &cli.command {
        Command::Design(_) => commands::cmd_design(&ctx),
        Command::Simulate(_) => commands::cmd_simulate(&ctx),
        Command::Theory(t) => commands::cmd_theory(&ctx, t.matrix.as_deref()),
        Command::Table2(_) => commands::cmd_table2(&ctx),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
