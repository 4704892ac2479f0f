use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;
use trustax::cli::{self, CliError, Invocation, SweepAxis};

#[derive(Parser)]
#[command(name = "trustax", version, about = "Optimal taxation when trust in the government is uncertain")]
struct Args {
    /// Flat TOML configuration; defaults are used for omitted keys.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides `out_dir`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Simulation seed (overrides `seed`).
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// One-period optimum at each belief, plus the trust cutoff.
    SolveStatic,
    /// Value-function iteration, policy, and shape diagnostics.
    SolveDynamic,
    /// Comparative statics along one axis: garble, enforce, persist, mixinfo.
    Sweep {
        #[arg(value_parser = |s: &str| s.parse::<SweepAxis>())]
        axis: SweepAxis,
    },
    /// Monte Carlo paths and the history-dependence check.
    Simulate,
    /// Static optimum at the reference beliefs, compared with reference coordinates.
    ReplicateFigures,
}

fn run(args: Args) -> Result<String, CliError> {
    let inv = Invocation::prepare(args.config.as_deref(), args.out.as_deref(), args.seed)?;
    match args.command {
        Command::SolveStatic => cli::cmd_solve_static(&inv),
        Command::SolveDynamic => cli::cmd_solve_dynamic(&inv),
        Command::Sweep { axis } => cli::cmd_sweep(&inv, axis),
        Command::Simulate => cli::cmd_simulate(&inv),
        Command::ReplicateFigures => cli::cmd_replicate_figures(&inv),
    }
}

fn main() -> ExitCode {
    match run(Args::parse()) {
        Ok(msg) => {
            println!("{msg}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
