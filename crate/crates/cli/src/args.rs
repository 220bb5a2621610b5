use std::num::{NonZeroU64, NonZeroUsize};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use triplecheck_core::ScoringMode;

#[derive(Parser, Debug)]
#[command(name = "triplecheck", version, about = "Schema-free factual consistency scoring over (subject, predicate, object) facts")]
pub struct Cli {
    /// Increase log verbosity (-v info, -vv debug); logs go to standard error.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,

    /// Only log errors.
    #[arg(short, long, global = true, conflicts_with = "verbose")]
    pub quiet: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Print TF-IDF entity-type weights as TSV (type, aggregate_weight, df, selected).
    Weights(WeightsArgs),
    /// Score every (document, model) pair; writes one report per line.
    Score(ScoreArgs),
    /// Compare models from a stream of score reports (Friedman + Nemenyi).
    Compare(CompareArgs),
    /// Weights, scoring and comparison in one pass.
    Run(RunArgs),
}

#[derive(Args, Debug)]
pub struct InputArgs {
    /// Fact files (line-delimited JSON); "-" reads standard input.
    #[arg(long, short, required = true, num_args = 1..)]
    pub input: Vec<String>,
}

#[derive(Args, Debug)]
pub struct OutputArgs {
    /// Write results here instead of standard output.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct WeightsArgs {
    #[command(flatten)]
    pub input: InputArgs,

    /// Number of top-weighted entity types to mark as selected.
    #[arg(long, default_value = "10")]
    pub top_n: NonZeroUsize,

    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Literal,
    #[value(name = "best_match", alias = "best-match")]
    BestMatch,
}

impl From<ModeArg> for ScoringMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Literal => ScoringMode::Literal,
            ModeArg::BestMatch => ScoringMode::BestMatch,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ProviderArg {
    /// Built-in hashed character-trigram similarity.
    Trigram,
    /// HTTP similarity backend at --provider-url.
    External,
}

#[derive(Args, Debug)]
pub struct ScoringArgs {
    /// Keep only facts whose subject type is among the top N by TF-IDF weight.
    #[arg(long, default_value = "10")]
    pub top_n: NonZeroUsize,

    /// literal: every target fact sharing a subject/object pair contributes;
    /// best_match: only the most similar one does.
    #[arg(long, value_enum, default_value = "literal")]
    pub mode: ModeArg,

    /// Predicate similarity backend.
    #[arg(long, value_enum, default_value = "trigram")]
    pub provider: ProviderArg,

    /// Base URL of the external backend (requests go to <url>/similarity).
    #[arg(long)]
    pub provider_url: Option<String>,

    /// Per-request timeout for the external backend.
    #[arg(long, default_value = "30000")]
    pub provider_timeout_ms: NonZeroU64,

    /// Worker threads for scoring; results do not depend on this.
    #[arg(long)]
    pub jobs: Option<NonZeroUsize>,
}

#[derive(Args, Debug)]
pub struct ScoreArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub scoring: ScoringArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct CompareArgs {
    /// Score reports, one JSON document per line; "-" reads standard input.
    #[command(flatten)]
    pub input: InputArgs,

    /// Significance level used to flag post-hoc p-values; never alters them.
    #[arg(long, default_value = "0.05")]
    pub alpha: f64,

    /// Add a generated_at field (seconds since the Unix epoch).
    #[arg(long)]
    pub timestamps: bool,

    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct RunArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub scoring: ScoringArgs,

    /// Significance level used to flag post-hoc p-values; never alters them.
    #[arg(long, default_value = "0.05")]
    pub alpha: f64,

    /// Add a generated_at field (seconds since the Unix epoch).
    #[arg(long)]
    pub timestamps: bool,

    #[command(flatten)]
    pub output: OutputArgs,
}
