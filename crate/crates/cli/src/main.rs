//! `succabs`: train, apply and evaluate successive-abstraction taggers.
//!
//! Exit status is 0 on success, 1 for usage errors (bad flags or flag
//! values) and 2 for data errors (unreadable or malformed files).

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "succabs", version, about = "Part-of-speech tagging with successive-abstraction smoothing")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Train a model from a tagged corpus.
    Train(TrainArgs),
    /// Tag plain text, one sentence per line.
    Tag(TagArgs),
    /// Evaluate a model on a tagged corpus.
    Eval(EvalArgs),
    /// Evaluate several models on one tagged corpus and compare them.
    Compare(CompareArgs),
    /// Write a synthetic train/test corpus pair.
    Synth(SynthArgs),
    /// Split a tagged corpus into train and test parts at sentence level.
    Split(SplitArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum RootModeArg {
    Rf,
    Ele,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SmoothingArg {
    Sa,
    Interp,
    Ele,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ObjectiveArg {
    Loglik,
    Accuracy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Table,
    Kv,
}

#[derive(Debug, Args)]
struct TrainArgs {
    /// Tagged training corpus (word TAB tag per line, blank line between sentences).
    #[arg(long)]
    corpus: PathBuf,
    /// Tag n-gram order.
    #[arg(long, default_value_t = 3)]
    order: usize,
    /// Words seen fewer times than this feed the suffix model.
    #[arg(long, default_value_t = 10)]
    rare_threshold: u64,
    /// Longest suffix (in letters, counting the word-start mark) to use.
    #[arg(long, default_value_t = 10)]
    max_suffix: usize,
    #[arg(long, value_enum, default_value_t = RootModeArg::Ele)]
    root_mode: RootModeArg,
    /// Multiplier on the entropy-derived weight of each context.
    #[arg(long, default_value_t = 1.0)]
    sigma_scale: f64,
    #[arg(long, value_enum, default_value_t = SmoothingArg::Sa)]
    smoothing: SmoothingArg,
    /// Interpolation weights, unigram first, comma-separated.
    #[arg(long, value_delimiter = ',')]
    lambdas: Option<Vec<f64>>,
    /// Held-out tagged corpus for a grid search over interpolation weights.
    #[arg(long, conflicts_with = "lambdas")]
    tune_gold: Option<PathBuf>,
    /// Grid spacing for the weight search.
    #[arg(long, default_value_t = 0.05, requires = "tune_gold")]
    grid_step: f64,
    /// What the weight search maximizes.
    #[arg(long, value_enum, default_value_t = ObjectiveArg::Loglik, requires = "tune_gold")]
    objective: ObjectiveArg,
    /// Allow every tag for known words when tuning on accuracy.
    #[arg(long)]
    open_lattice: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct TagArgs {
    #[arg(long)]
    model: PathBuf,
    /// Input text; standard input when absent.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Output file; standard output when absent.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Allow every tag for known words.
    #[arg(long)]
    open_lattice: bool,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    gold: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
    #[arg(long)]
    open_lattice: bool,
}

#[derive(Debug, Args)]
struct CompareArgs {
    /// Model files; give at least two.
    #[arg(long = "model", required = true, num_args = 1)]
    models: Vec<PathBuf>,
    #[arg(long)]
    gold: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
    #[arg(long)]
    open_lattice: bool,
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 8)]
    num_tags: usize,
    #[arg(long, default_value_t = 500)]
    vocab_size: usize,
    #[arg(long, default_value_t = 50_000)]
    train_tokens: usize,
    #[arg(long, default_value_t = 5_000)]
    test_tokens: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 2.0)]
    zipf_exponent: f64,
    #[arg(long)]
    train_out: PathBuf,
    #[arg(long)]
    test_out: PathBuf,
    /// JSON description of the generating distributions.
    #[arg(long)]
    spec_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SplitArgs {
    #[arg(long)]
    corpus: PathBuf,
    /// Share of sentences that go to the training part.
    #[arg(long)]
    train_fraction: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    train_out: PathBuf,
    #[arg(long)]
    test_out: PathBuf,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Train(a) => commands::train(a),
        Command::Tag(a) => commands::tag(a),
        Command::Eval(a) => commands::eval(a),
        Command::Compare(a) => commands::compare(a),
        Command::Synth(a) => commands::synth(a),
        Command::Split(a) => commands::split(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(e.exit_code())
        }
    }
}
