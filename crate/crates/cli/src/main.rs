//! `memtrack`: simulate sequences, track them, score results, run ablations.
//!
//! Exit codes: 0 success, 1 some sequences failed, 2 bad input.

mod ablate;
mod eval;
mod jobs;
mod report;
mod simulate;
mod track;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "memtrack", version, about = "Motion-aware memory tracking on synthetic or replayed sequences")]
struct Cli {
    /// Worker threads for per-sequence work (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AblateKind {
    /// baseline, motion, memory and full cells.
    Modules,
    /// The full tracker at each motion weight in the config's `alphas`.
    Alpha,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a scenario's ground truth files.
    Simulate {
        /// Scenario JSON file.
        #[arg(long)]
        config: PathBuf,
        /// Override the scenario seed; repeat for several sequences.
        #[arg(long = "seed")]
        seeds: Vec<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Track every sequence of a run config and write per-frame results.
    Track {
        #[arg(long)]
        config: PathBuf,
        #[arg(long = "seed")]
        seeds: Vec<u64>,
        /// Output directory, overriding the config's `out_dir`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Track once per ablation cell instead of with the configured tracker.
        #[arg(long)]
        ablate: Option<AblateKind>,
    },
    /// Score result files against ground truth.
    Eval {
        /// Directory searched recursively for `*.jsonl` result files.
        results: PathBuf,
        /// Directory holding one `<sequence id>/gt.txt` per sequence.
        gt: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        emit_plots: bool,
    },
    /// Run an ablation grid and write per-cell summaries.
    Ablate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long = "seed")]
        seeds: Vec<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value = "modules")]
        ablate: AblateKind,
        #[arg(long)]
        emit_plots: bool,
    },
    /// Tabulate eval or ablate outputs as Markdown.
    Report {
        /// Eval output directories (with `summary.json`) or ablate output
        /// directories (with `ablation.json`).
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        /// Write the table here as well as to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write an overlay of the success curves next to `--out`.
        #[arg(long)]
        emit_plots: bool,
    },
}

/// How a command ended when it did not hit an input error.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    PartialFailure,
}

fn run(cli: Cli) -> anyhow::Result<Outcome> {
    if let Some(n) = cli.jobs {
        rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global()?;
    }
    match cli.command {
        Command::Simulate { config, seeds, out } => simulate::run(&config, &seeds, &out),
        Command::Track {
            config,
            seeds,
            out,
            ablate,
        } => track::run(&config, &seeds, out, ablate),
        Command::Eval {
            results,
            gt,
            out,
            emit_plots,
        } => eval::run(&results, &gt, &out, emit_plots),
        Command::Ablate {
            config,
            seeds,
            out,
            ablate,
            emit_plots,
        } => ablate::run(&config, &seeds, out, ablate, emit_plots),
        Command::Report { inputs, out, emit_plots } => report::run(&inputs, out.as_deref(), emit_plots),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(Outcome::Success) => ExitCode::SUCCESS,
        Ok(Outcome::PartialFailure) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
