use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod grid;
mod manifest;

use commands::{OptimumArgs, PhysicsArgs, SweepArgs, ThresholdArgs, YieldArgs};

/// Percolation simulations of heralded-entanglement cluster states.
#[derive(Debug, Parser)]
#[command(name = "percsim", version)]
struct Cli {
    /// Directory for CSV/JSON outputs and run manifests.
    #[arg(
        long,
        global = true,
        env = "PERCSIM_OUT",
        default_value = "percsim-out"
    )]
    out: PathBuf,

    /// Worker threads (0 = one per core). Never changes output bytes.
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Largest-cluster fraction against bond probability and time.
    Sweep(SweepArgs),
    /// Bond or site threshold estimate.
    Threshold(ThresholdArgs),
    /// Minimal bond probability and time against site yield.
    Yield(YieldArgs),
    /// Closed-form threshold times for a device.
    Physics(PhysicsArgs),
    /// Transparent fraction giving the largest cluster for a time budget.
    Optimum(OptimumArgs),
    /// Re-run a manifest into a new directory and compare checksums.
    Replay { manifest: PathBuf },
}

/// Exit status for invalid arguments, matching clap's usage errors.
const EXIT_INVALID: u8 = 2;
/// Exit status when the input cannot percolate and a result needs it to.
const EXIT_NON_PERCOLATING: u8 = 3;

fn run(cli: Cli, args: Vec<String>) -> anyhow::Result<()> {
    let ctx = commands::Context {
        out: cli.out,
        workers: cli.workers,
        args,
    };
    match cli.command {
        Command::Sweep(a) => commands::sweep(&ctx, &a),
        Command::Threshold(a) => commands::threshold(&ctx, &a),
        Command::Yield(a) => commands::yield_curve(&ctx, &a),
        Command::Physics(a) => commands::physics(&ctx, &a),
        Command::Optimum(a) => commands::optimum(&ctx, &a),
        Command::Replay { manifest } => manifest::replay(&manifest, &ctx.out, ctx.workers),
    }
}

/// Parse and run a stored argument list with outputs redirected to `out`.
pub(crate) fn run_args(args: Vec<String>, out: PathBuf, workers: usize) -> anyhow::Result<()> {
    let mut cli = Cli::try_parse_from(std::iter::once("percsim".to_string()).chain(args.clone()))?;
    cli.out = out;
    cli.workers = workers;
    run(cli, args)
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<perc_core::Error>() {
        Some(perc_core::Error::NonPercolating(_)) => EXIT_NON_PERCOLATING,
        Some(_) => EXIT_INVALID,
        None if err.downcast_ref::<grid::GridError>().is_some() => EXIT_INVALID,
        None => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let args: Vec<String> = std::env::args().skip(1).collect();
    match run(cli, args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        let non = anyhow::Error::from(perc_core::Error::NonPercolating("q below q_c".into()));
        assert_eq!(exit_code(&non), EXIT_NON_PERCOLATING);
        let bad = anyhow::Error::from(perc_core::Error::EmptyGraph);
        assert_eq!(exit_code(&bad), EXIT_INVALID);
        let grid = anyhow::Error::from(grid::GridError("x".into()));
        assert_eq!(exit_code(&grid), EXIT_INVALID);
        assert_eq!(exit_code(&anyhow::anyhow!("disk full")), 1);
    }
}
