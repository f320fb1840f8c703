mod cmd;
mod config;
mod util;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "adjscale", version, about = "Rank scalar adjectives by intensity and evaluate the rankings")]
#[command(args_override_self = true)]
struct Cli {
    /// Only print warnings and errors.
    #[arg(short, long, global = true)]
    quiet: bool,

    /// Flat key = value file of flags for the subcommand.
    /// Read before the subcommand's own flags, which take precedence.
    #[arg(long = "config", global = true, value_name = "FILE")]
    _config: Option<std::path::PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Collect sentences containing scale adjectives from a corpus.
    Collect(cmd::corpus::CollectArgs),
    /// Replace each instance's adjective with its scale-mates.
    Substitute(cmd::corpus::SubstituteArgs),
    /// Drop instances whose adjective sits in a hypernymy pattern.
    HearstFilter(cmd::corpus::HearstArgs),
    /// Choose the sentences used for each scale.
    Select(cmd::select::SelectArgs),
    /// Build intensity directions from anchor pairs.
    BuildDvec(cmd::rank::BuildDvecArgs),
    /// Rank every scale of a dataset and score the rankings.
    Rank(cmd::rank::RankArgs),
    /// Score saved rankings against gold scales.
    Evaluate(cmd::rank::EvaluateArgs),
    /// Answer indirect yes/no questions with an intensity direction.
    Qa(cmd::qa::QaArgs),
    /// Build and score the sentence-selection benchmark.
    SelectionBench(cmd::select::BenchArgs),
}

const SUBCOMMANDS: [&str; 9] = [
    "collect",
    "substitute",
    "hearst-filter",
    "select",
    "build-dvec",
    "rank",
    "evaluate",
    "qa",
    "selection-bench",
];

fn main() {
    let argv = match config::expand_args(std::env::args_os().collect(), &SUBCOMMANDS) {
        Ok(a) => a,
        Err(msg) => {
            eprintln!("error: {msg}");
            std::process::exit(2);
        }
    };
    let cli = Cli::try_parse_from(argv).unwrap_or_else(|e| e.exit());
    let level = if cli.quiet {
        log::LevelFilter::Warn
    } else {
        log::LevelFilter::Info
    };
    env_logger::Builder::new()
        .filter_level(level)
        .format_timestamp(None)
        .format_target(false)
        .init();

    let result = match cli.command {
        Command::Collect(a) => cmd::corpus::collect(a),
        Command::Substitute(a) => cmd::corpus::substitute(a),
        Command::HearstFilter(a) => cmd::corpus::hearst_filter(a),
        Command::Select(a) => cmd::select::select(a),
        Command::BuildDvec(a) => cmd::rank::build_dvec(a),
        Command::Rank(a) => cmd::rank::rank(a),
        Command::Evaluate(a) => cmd::rank::evaluate(a),
        Command::Qa(a) => cmd::qa::qa(a),
        Command::SelectionBench(a) => cmd::select::selection_bench(a),
    };
    if let Err(e) = result {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
