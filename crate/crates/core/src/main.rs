use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use dbar_edge::cli;

#[derive(Parser)]
#[command(name = "dbar-edge", version, about = "Spectral solver and edge-singularity analyzer")]
struct Args {
    /// Suppress progress messages; errors still go to standard error.
    #[arg(long, global = true)]
    quiet: bool,
    /// Output directory (defaults to out.dir of the config, else ./out).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve for the configured data and write the solution container.
    Solve {
        #[arg(long)]
        config: PathBuf,
    },
    /// Residual, edge and Lp checks of a solution container.
    Verify {
        solution: PathBuf,
        #[arg(long)]
        config: PathBuf,
    },
    /// Fit the singular edge profile of a solution container.
    Fit {
        solution: PathBuf,
        #[arg(long)]
        config: PathBuf,
    },
    /// Compare the residue formula with quadrature at random points.
    ResidueTable {
        #[arg(long, default_value_t = 3)]
        j_max: u32,
        #[arg(long, default_value_t = 100)]
        samples: usize,
    },
    /// Asymptotic expansion terms of a solution container.
    Expand {
        solution: PathBuf,
        #[arg(long, default_value_t = 1)]
        n: usize,
    },
}

fn main() -> ExitCode {
    let args = Args::parse();
    let out = args.out.as_deref();
    let code = match &args.command {
        Command::Solve { config } => cli::cmd_solve(config, out, args.quiet),
        Command::Verify { solution, config } => cli::cmd_verify(solution, config, out, args.quiet),
        Command::Fit { solution, config } => cli::cmd_fit(solution, config, out, args.quiet),
        Command::ResidueTable { j_max, samples } => cli::cmd_residue_table(*j_max, *samples, out, args.quiet),
        Command::Expand { solution, n } => cli::cmd_expand(solution, *n, out, args.quiet),
    };
    ExitCode::from(code as u8)
}
