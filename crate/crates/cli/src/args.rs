use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

/// Data recipes for long-context continual pretraining.
///
/// Typical pipeline: ingest -> stats -> mix -> audit -> pack -> plan.
/// Every command that writes an output directory also writes run.json
/// with the resolved configuration and input digests; `forge replay`
/// re-executes it.
#[derive(Parser, Debug)]
#[command(name = "forge", version)]
pub struct Cli {
    /// Seed for sampling; overrides the seed in a mixture config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Worker threads; 0 uses one per core.
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,

    /// Log level for stderr: off, error, warn, info, debug, trace.
    #[arg(long, global = true, default_value = "info")]
    pub log_level: log::LevelFilter,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Read JSONL corpora (optionally .gz) into token-capped shards.
    Ingest(IngestArgs),
    /// Per-domain length statistics, histogram and long fractions.
    Stats(StatsArgs),
    /// Build a seeded sampled dataset from a sharded corpus.
    Mix(MixArgs),
    /// Check a sampled dataset against its domain and long-fraction targets.
    Audit(AuditArgs),
    /// Pack a sampled dataset into fixed-length chunks.
    Pack(PackArgs),
    /// Optimization steps and wallclock estimate for a token budget.
    Plan(PlanArgs),
    /// Needle-in-a-haystack grids.
    #[command(subcommand)]
    Needle(NeedleCommand),
    /// Per-domain loss differences against a baseline run.
    Lossdiff(LossdiffArgs),
    /// Data-scaling curve table and plot.
    Curve(CurveArgs),
    /// Re-run a command from its run.json.
    Replay(ReplayArgs),
}

#[derive(Args, Debug)]
pub struct IngestArgs {
    /// Input files or glob patterns (JSONL records with id, domain and text or tokens).
    #[arg(required = true)]
    pub inputs: Vec<String>,
    /// Output directory for shards and manifest.json.
    #[arg(long)]
    pub out: PathBuf,
    /// bytes, whitespace, or pretokenized (records carry `tokens`).
    #[arg(long, default_value = "whitespace")]
    pub tokenizer: String,
    /// Token cap per shard; accepts suffixes like 64M.
    #[arg(long, default_value = "64M")]
    pub shard_tokens: String,
}

#[derive(Args, Debug)]
pub struct StatsArgs {
    /// Shard directory or manifest.json.
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Documents strictly longer than this many tokens are long.
    #[arg(long, default_value_t = forge_core::DEFAULT_LONG_THRESHOLD)]
    pub long_threshold: u64,
    /// Histogram bin edges, comma separated (default 0,256,512,...,262144).
    #[arg(long, value_delimiter = ',')]
    pub edges: Option<Vec<u64>>,
}

#[derive(Args, Debug)]
pub struct MixArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// TOML mixture recipe; flags below override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// cut_4k, cut_128k, per_source_upsample, global_upsample, domain_upsample.
    #[arg(long)]
    pub strategy: Option<String>,
    /// Token budget, e.g. 5e9 or 1M (decimal suffixes).
    #[arg(long)]
    pub budget: Option<String>,
    /// Long-data fraction target, default 0.7.
    #[arg(long)]
    pub target_long_fraction: Option<f64>,
    /// Long-document threshold in tokens, default 4096.
    #[arg(long)]
    pub long_threshold: Option<u64>,
    /// Cut documents to this many tokens before sampling.
    #[arg(long)]
    pub cut_len: Option<u64>,
    /// tokens or documents.
    #[arg(long)]
    pub long_basis: Option<String>,
    /// Boosted domains for domain_upsample (repeatable).
    #[arg(long)]
    pub boost: Vec<String>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct AuditArgs {
    /// Directory written by `forge mix`.
    #[arg(long)]
    pub dataset: PathBuf,
    #[arg(long, default_value_t = 0.01)]
    pub share_tol: f64,
    #[arg(long, default_value_t = 0.02)]
    pub long_tol: f64,
    /// Defaults to the dataset directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct PackArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    /// Corpus the dataset was sampled from; defaults to the one recorded by `forge mix`.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Chunk length; K/M suffixes are binary (80K = 81920).
    #[arg(long, default_value = "80K")]
    pub chunk_len: String,
    /// Separator between documents: eot, none, or a token id.
    #[arg(long, default_value = "eot")]
    pub separator: String,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct PlanArgs {
    /// Training tokens, e.g. 5e9 or 5B.
    #[arg(long)]
    pub tokens: String,
    /// Tokens per optimization step, e.g. 4M or 4e6.
    #[arg(long, default_value = "4M")]
    pub batch: String,
    /// Read K/M/B suffixes as powers of 1000 instead of 1024.
    #[arg(long)]
    pub decimal: bool,
    /// Hardware profile name, e.g. 7b-80k-8xA100.
    #[arg(long)]
    pub profile: Option<String>,
    /// Extra profiles as TOML `[[profile]]` tables.
    #[arg(long)]
    pub profiles: Option<PathBuf>,
    /// Also write plan.json and run.json here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum NeedleCommand {
    /// Generate the (length x depth) case grid.
    Gen(NeedleGenArgs),
    /// Score model transcripts against generated cases.
    Score(NeedleScoreArgs),
    /// Aggregate scores into a heatmap table and image.
    Report(NeedleReportArgs),
}

#[derive(Args, Debug)]
pub struct NeedleGenArgs {
    /// TOML needle spec; every field has a default.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    /// Shard directory of filler documents.
    #[arg(long)]
    pub filler: PathBuf,
    /// Defaults to the tokenizer recorded in the filler manifest.
    #[arg(long)]
    pub tokenizer: Option<String>,
    /// Include decoded prompt text in each case.
    #[arg(long)]
    pub with_text: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct NeedleScoreArgs {
    /// cases.jsonl or the directory holding it.
    #[arg(long)]
    pub cases: PathBuf,
    /// JSONL transcripts {case_id, output_text}.
    #[arg(long)]
    pub responses: PathBuf,
    #[arg(long, default_value = "whitespace")]
    pub tokenizer: String,
    /// Defaults to the directory of the responses file.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct NeedleReportArgs {
    /// scores.jsonl written by `forge needle score`.
    #[arg(long)]
    pub scores: PathBuf,
    #[arg(long, default_value_t = forge_core::report::DEFAULT_GREEN_THRESHOLD)]
    pub green_threshold: f64,
    /// Training context length, marked with a dashed line (e.g. 80K).
    #[arg(long)]
    pub train_len: Option<String>,
    /// Defaults to the directory of the scores file.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct LossdiffArgs {
    /// CSV with run_id,domain,band,loss for the baseline run.
    #[arg(long)]
    pub baseline: PathBuf,
    /// Variant CSVs (repeatable).
    #[arg(long, required = true)]
    pub variant: Vec<PathBuf>,
    #[arg(long, default_value_t = forge_core::report::DEFAULT_SIGNIFICANCE)]
    pub threshold: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct CurveArgs {
    /// CSV with trained_tokens,validation_loss,needle_mean_score.
    #[arg(long)]
    pub points: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct ReplayArgs {
    /// run.json or the directory holding it.
    pub run: PathBuf,
    /// Write into this directory instead of the recorded one.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Replay even if recorded input digests no longer match.
    #[arg(long)]
    pub force: bool,
}
