use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use nlwave::cli;

#[derive(Parser)]
#[command(name = "nlwave", version, about = "Nonlocal elastic wave solvers and analysis")]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one problem from a JSON config and write snapshots.csv
    Run {
        config: PathBuf,
        /// Output directory (overrides the config's output.dir)
        #[arg(long)]
        out: Option<PathBuf>,
        /// Suppress informational output
        #[arg(long)]
        quiet: bool,
    },
    /// Manufactured-solution convergence sweeps, writing convergence.csv
    Convergence {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        quiet: bool,
    },
    /// Companion spectral radii per (scheme, N, dt), writing stability.csv
    Stability {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        quiet: bool,
    },
    /// Two solvers on one problem, writing the disagreement to compare.csv
    Compare {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        quiet: bool,
    },
}

fn main() -> ExitCode {
    let args = Args::parse();
    let code = match &args.command {
        Command::Run { config, out, quiet } => cli::cmd_run(config, out.as_deref(), *quiet),
        Command::Convergence { config, out, quiet } => {
            cli::cmd_convergence(config, out.as_deref(), *quiet)
        }
        Command::Stability { config, out, quiet } => {
            cli::cmd_stability(config, out.as_deref(), *quiet)
        }
        Command::Compare { config, out, quiet } => {
            cli::cmd_compare(config, out.as_deref(), *quiet)
        }
    };
    ExitCode::from(code as u8)
}
