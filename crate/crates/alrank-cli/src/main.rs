//! `alrank`: synthetic ranking corpora, committee-based acquisition, and
//! a simulated annotation loop, from one binary.

mod commands;
mod config;

use std::path::PathBuf;
use std::process;

use clap::{Args, Parser, Subcommand};

use alrank::acquisition::Strategy;
use alrank::metrics::GainFn;

const PRECEDENCE: &str = "Configuration precedence: command-line flags override config-file \
values, which override built-in defaults. All randomness derives from the single master seed \
by fixed offsets, so identical flags and inputs reproduce identical outputs at any --threads \
setting.";

#[derive(Parser)]
#[command(
    name = "alrank",
    version,
    about = "Active learning for ranking: generate corpora, run annotation loops, analyze criteria",
    long_about = None,
    after_help = PRECEDENCE,
    propagate_version = true
)]
struct Cli {
    /// Worker-thread cap; 0 uses every core. Results do not depend on it.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic labeled corpus in LETOR format
    Gen(GenArgs),
    /// Simulate the annotation loop and write a run report
    Run(RunArgs),
    /// Emit correlation and distribution tables for a labeled corpus
    Analyze(AnalyzeArgs),
    /// Score a labeled corpus with a saved ranker
    Eval(EvalArgs),
    /// Attach baseline deltas to a run report
    Report(ReportArgs),
}

#[derive(Args)]
pub struct GenArgs {
    /// Config file supplying generator defaults
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Number of queries (at least 10, one per frequency bucket)
    #[arg(long)]
    pub queries: Option<usize>,
    /// Documents per query
    #[arg(long)]
    pub docs: Option<usize>,
    /// Feature dimension
    #[arg(long)]
    pub dim: Option<usize>,
    /// Standard deviation of feature noise; 0 is perfectly separable
    #[arg(long)]
    pub noise: Option<f64>,
    /// Generator seed
    #[arg(long)]
    pub seed: Option<u64>,
    /// Shift query ids so separately generated corpora stay disjoint
    #[arg(long, default_value_t = 0)]
    pub qid_offset: u32,
    /// Also split off this many extra queries, drawn from the same
    /// corpus, as a held-out validation file
    #[arg(long, requires = "val_out")]
    pub val_queries: Option<usize>,
    /// Output file for the validation split
    #[arg(long, requires = "val_queries")]
    pub val_out: Option<PathBuf>,
    /// Output file
    #[arg(short, long)]
    pub out: PathBuf,
}

#[derive(Args)]
#[command(after_help = PRECEDENCE)]
pub struct RunArgs {
    /// Unlabeled pool corpus (LETOR); labels act as the held-back oracle
    #[arg(long)]
    pub pool: Option<PathBuf>,
    /// Held-out validation corpus (LETOR), disjoint from the pool
    #[arg(long)]
    pub val: Option<PathBuf>,
    /// Config file; flags below override its values
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Selection strategy: random, re, pv, lv, re_pv, elo_dcg
    #[arg(long, value_parser = parse_strategy)]
    pub strategy: Option<Strategy>,
    /// Weight of prediction variance in the combined criterion
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Initially labeled queries
    #[arg(long)]
    pub base: Option<usize>,
    /// Queries annotated per cycle
    #[arg(long)]
    pub bs: Option<usize>,
    /// Annotation cycles
    #[arg(long)]
    pub cycles: Option<usize>,
    /// Total annotation budget
    #[arg(long)]
    pub quota: Option<usize>,
    /// Pairwise-probability and loss temperature
    #[arg(long)]
    pub temperature: Option<f64>,
    /// Evaluation cutoff for DCG and the low-grade share
    #[arg(long)]
    pub eval_k: Option<usize>,
    /// Gain function: exponential or linear
    #[arg(long, value_parser = parse_gain)]
    pub gain: Option<GainFn>,
    /// Master seed
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output prefix for <prefix>.json and <prefix>.csv
    #[arg(short, long, default_value = "run")]
    pub out: String,
    /// Also train a committee on the full pool and save it as JSON
    #[arg(long)]
    pub save_committee: Option<PathBuf>,
    /// Also train the production ranker on the full pool and save it as JSON
    #[arg(long)]
    pub save_model: Option<PathBuf>,
    /// Print the effective configuration as TOML and exit
    #[arg(long)]
    pub print_config: bool,
}

#[derive(Args)]
pub struct AnalyzeArgs {
    /// Labeled corpus to study (LETOR)
    #[arg(long)]
    pub data: PathBuf,
    /// Committee artifact from `run --save-committee`
    #[arg(long)]
    pub committee: PathBuf,
    /// Config file supplying eval defaults
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Cutoff for the best-DCG column
    #[arg(long)]
    pub eval_k: Option<usize>,
    /// Gain function: exponential or linear
    #[arg(long, value_parser = parse_gain)]
    pub gain: Option<GainFn>,
    /// Output directory for the three CSV tables and the JSON summary
    #[arg(short, long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct EvalArgs {
    /// Ranker artifact from `run --save-model`
    #[arg(long)]
    pub model: PathBuf,
    /// Labeled corpus (LETOR)
    #[arg(long)]
    pub data: PathBuf,
    /// Evaluation cutoff
    #[arg(long, default_value_t = 4)]
    pub k: usize,
    /// Gain function: exponential or linear
    #[arg(long, value_parser = parse_gain, default_value = "exponential")]
    pub gain: GainFn,
    /// Output file; prints to stdout when omitted
    #[arg(short, long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct ReportArgs {
    /// Run report JSON to annotate
    #[arg(long)]
    pub run: PathBuf,
    /// Baseline run report JSON
    #[arg(long)]
    pub baseline: PathBuf,
    /// Name recorded for the baseline; defaults to its strategy
    #[arg(long)]
    pub name: Option<String>,
    /// Output file; prints to stdout when omitted
    #[arg(short, long)]
    pub out: Option<PathBuf>,
}

fn parse_strategy(s: &str) -> Result<Strategy, String> {
    s.parse().map_err(|e: alrank::Error| e.to_string())
}

fn parse_gain(s: &str) -> Result<GainFn, String> {
    s.parse().map_err(|e: alrank::Error| e.to_string())
}

fn main() {
    // Clap's default failure exit code is 2, which this tool reserves
    // for data errors; usage problems exit 1 instead.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = if err.use_stderr() { 1 } else { 0 };
            let _ = err.print();
            process::exit(code);
        }
    };

    if cli.threads > 0 {
        if let Err(err) = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
        {
            eprintln!("error: thread pool: {err}");
            process::exit(3);
        }
    }

    let result = match &cli.command {
        Command::Gen(args) => commands::cmd_gen(args),
        Command::Run(args) => commands::cmd_run(args),
        Command::Analyze(args) => commands::cmd_analyze(args),
        Command::Eval(args) => commands::cmd_eval(args),
        Command::Report(args) => commands::cmd_report(args),
    };
    if let Err(err) = result {
        eprintln!("error: {}", err.message());
        process::exit(err.exit_code());
    }
}
