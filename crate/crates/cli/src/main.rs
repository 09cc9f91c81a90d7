//! `aitwin`: build component maps, certify them, train twins, compose and
//! verify circuits.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use aitwin_core::approx::Method;

#[derive(Parser)]
#[command(name = "aitwin", version, about = "Neural twins of neuron and synapse components")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

/// Flags shared by every command.
#[derive(Args, Clone, Debug)]
pub struct Common {
    /// Seed for every random draw.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Directory for reports and artifacts (created if missing).
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    /// JSON file with command-specific settings.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum MethodArg {
    Elm,
    Bp,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Elm => Method::Elm,
            MethodArg::Bp => Method::Bp,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Sample a component's static map from its parameter file.
    Map {
        component: PathBuf,
        /// Grid points over the component's domain.
        #[arg(long, default_value_t = 64)]
        grid: usize,
    },
    /// Certify piecewise continuity and all-or-none smoothness of a map.
    Check { map: PathBuf },
    /// Train a twin of a map to a held-out L2 tolerance.
    Train {
        map: PathBuf,
        #[arg(long, default_value_t = 1e-2)]
        delta: f64,
        #[arg(long, value_enum)]
        method: Option<MethodArg>,
        /// Largest hidden layer (ELM) or total epochs (BP).
        #[arg(long)]
        budget: Option<usize>,
    },
    /// Train a twin for every component of a circuit.
    Twinize {
        graph: PathBuf,
        /// Tolerance for every component (or end to end with --global).
        #[arg(long)]
        delta: Option<f64>,
        /// Treat --delta as one end-to-end tolerance split across components.
        #[arg(long)]
        global: bool,
        #[arg(long, value_enum)]
        method: Option<MethodArg>,
        #[arg(long)]
        budget: Option<usize>,
    },
    /// Measure the output deviation between two circuits.
    Verify {
        original: PathBuf,
        twinned: PathBuf,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        /// Fail with the tolerance exit code above this RMS deviation.
        #[arg(long)]
        delta: Option<f64>,
    },
    /// Compare backpropagation increments with finite differences.
    Gradcheck {
        net: PathBuf,
        dataset: PathBuf,
        /// Largest accepted relative deviation.
        #[arg(long, default_value_t = 1e-6)]
        delta: f64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let common = cli.common;
    let result = match cli.command {
        Command::Map { component, grid } => commands::map(&common, &component, grid),
        Command::Check { map } => commands::check(&common, &map),
        Command::Train {
            map,
            delta,
            method,
            budget,
        } => commands::train(&common, &map, delta, method.map(Into::into), budget),
        Command::Twinize {
            graph,
            delta,
            global,
            method,
            budget,
        } => commands::twinize(&common, &graph, delta, global, method.map(Into::into), budget),
        Command::Verify {
            original,
            twinned,
            trials,
            delta,
        } => commands::verify(&common, &original, &twinned, trials, delta),
        Command::Gradcheck { net, dataset, delta } => commands::gradcheck(&common, &net, &dataset, delta),
    };
    match result {
        Ok(outcome) => {
            println!("{}", outcome.summary);
            ExitCode::from(outcome.status as u8)
        }
        Err(e) => {
            eprintln!("error: {}", e.error);
            ExitCode::from(e.status as u8)
        }
    }
}
