//! Command-line entry point: dataset building, statistics, baseline and
//! model summarization, toy training, evaluation, and the top-K sweep.

mod commands;
mod config;
mod error;
mod manifest;

use clap::{Parser, Subcommand, ValueEnum};
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "mixsum",
    version,
    about = "Mixed-language multi-document summarization toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BackendChoice {
    /// Deterministic tagged mock translator.
    Mock,
    /// Remote HTTP service configured through the environment.
    Http,
}

#[derive(Subcommand)]
enum Command {
    /// Build mixed-language pairs from English clusters by round-trip
    /// translation scoring and greedy language assignment.
    BuildDataset {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum, default_value_t = BackendChoice::Mock)]
        backend: BackendChoice,
    },
    /// Print corpus statistics for a dataset file.
    Stats {
        #[arg(long)]
        input: PathBuf,
        /// Also write the report as JSON.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Produce one summary per cluster with a baseline or the model.
    Summarize {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        /// centroid | lexrank | mmr | textrank | translate-then-{x} |
        /// {x}-then-translate | model
        #[arg(long)]
        method: String,
        /// Sentence budget for extractive methods.
        #[arg(long)]
        budget: Option<usize>,
        /// Top-K override for the model method.
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum, default_value_t = BackendChoice::Mock)]
        backend: BackendChoice,
    },
    /// Score summaries against dataset references with ROUGE-1/2/L.
    Evaluate {
        /// Summaries JSONL.
        #[arg(long)]
        input: PathBuf,
        /// Dataset JSONL holding the references.
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
        /// Row label in the report (defaults to the input file stem).
        #[arg(long)]
        label: Option<String>,
    },
    /// Run extract+generate for several top-K values and emit a CSV.
    SweepK {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        /// Comma-separated K values, e.g. 1,5,10.
        #[arg(long)]
        k: String,
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Dump the constructed graphs of a dataset as JSON for debugging.
    DumpGraph {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        /// Restrict the dump to one cluster id.
        #[arg(long)]
        cluster: Option<String>,
    },
    /// Train the extract-generate model on a JSONL corpus and write a
    /// checkpoint plus vocabulary.
    TrainExtractor {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        epochs: Option<usize>,
    },
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::BuildDataset {
            input,
            output,
            config,
            seed,
            backend,
        } => commands::build::run(&input, &output, config.as_deref(), seed, backend),
        Command::Stats { input, output } => commands::stats::run(&input, output.as_deref()),
        Command::Summarize {
            input,
            output,
            method,
            budget,
            k,
            checkpoint,
            config,
            seed,
            backend,
        } => commands::summarize::run(commands::summarize::Args {
            input: &input,
            output: &output,
            method: &method,
            budget,
            k,
            checkpoint: checkpoint.as_deref(),
            config: config.as_deref(),
            seed,
            backend,
        }),
        Command::Evaluate {
            input,
            dataset,
            output,
            label,
        } => commands::evaluate::run(&input, &dataset, output.as_deref(), label.as_deref()),
        Command::SweepK {
            input,
            output,
            k,
            checkpoint,
            config,
            seed,
        } => commands::sweep::run(
            &input,
            &output,
            &k,
            checkpoint.as_deref(),
            config.as_deref(),
            seed,
        ),
        Command::DumpGraph {
            input,
            output,
            cluster,
        } => commands::dump_graph::run(&input, &output, cluster.as_deref()),
        Command::TrainExtractor {
            input,
            output,
            config,
            seed,
            epochs,
        } => commands::train::run(&input, &output, config.as_deref(), seed, epochs),
    };
    if let Err(e) = result {
        eprintln!("error: {e}");
        std::process::exit(e.code());
    }
}
