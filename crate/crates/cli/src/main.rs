use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod error;
mod grid;
mod output;
mod svg;

/// Contextual probability toolkit: Bell/CHSH tables, classical vs sphere
/// fits, the ε-model opinion poll, and liar-chain dynamics.
#[derive(Debug, Parser)]
#[command(name = "qcontext", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Input file (JSON, or the sentence list for `liar`).
    #[arg(long = "in", value_name = "FILE")]
    pub input: PathBuf,
    /// Output directory.
    #[arg(long, value_name = "DIR", env = "QCONTEXT_OUT", default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate the CHSH expression on four coincidence tables.
    Bell {
        #[command(flatten)]
        common: Common,
    },
    /// Simulate the three-question poll and classify its conditional table.
    Poll {
        #[command(flatten)]
        common: Common,
        /// Overrides the seed in the config file.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides ε in the config file.
        #[arg(long)]
        epsilon: Option<f64>,
        /// Shuffle the question order per respondent.
        #[arg(long)]
        randomize_order: bool,
        /// Also write poll.svg.
        #[arg(long)]
        svg: bool,
    },
    /// Continuous-time trace of a liar chain.
    Liar {
        #[command(flatten)]
        common: Common,
        /// Initial hypothesis, e.g. `1:true`.
        #[arg(long, default_value = "1:true")]
        hypothesis: String,
        /// Duration of one discrete inference step.
        #[arg(long, default_value_t = qcontext::dynamics::DEFAULT_TAU)]
        tau: f64,
        /// Time grid, e.g. `0:10pi:pi/20`.
        #[arg(long, value_name = "START:STOP:STEP", default_value = "0:10pi:pi/20")]
        grid: String,
        /// Also write trace.svg.
        #[arg(long)]
        svg: bool,
    },
    /// Kolmogorov and sphere-model fits of a conditional probability table.
    Classify {
        #[command(flatten)]
        common: Common,
    },
    /// Check a transition kernel file.
    KernelValidate {
        #[command(flatten)]
        common: Common,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Bell { common } => commands::bell(&common),
        Command::Poll { common, seed, epsilon, randomize_order, svg } => {
            commands::poll(&common, seed, epsilon, randomize_order, svg)
        }
        Command::Liar { common, hypothesis, tau, grid, svg } => {
            commands::liar(&common, &hypothesis, tau, &grid, svg)
        }
        Command::Classify { common } => commands::classify(&common),
        Command::KernelValidate { common } => commands::kernel_validate(&common),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qcontext: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
