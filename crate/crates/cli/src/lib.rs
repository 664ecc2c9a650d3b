//! Command-line driver for the policy-overlap pipeline.
//!
//! Every verb reads its inputs, writes versioned JSON artifacts into the
//! `--out` directory together with a run manifest, and prints a report in
//! the requested `--format`.

pub mod commands;
pub mod error;
pub mod manifest;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use policy_overlap::analysis::ScoringConfig;
use policy_overlap::models::{ForestConfig, SvmConfig};
use policy_overlap::overlap::RegimeParams;
use policy_overlap::pipeline::TrainConfig;
use policy_overlap::textproc::{SentenceConfig, TfidfConfig};
use serde::{Deserialize, Serialize};

pub use error::{CliError, CliResult};

#[derive(Parser, Debug, Clone)]
#[command(name = "policy-overlap", version, about = "Concept overlap between privacy policies and terms of service")]
pub struct Cli {
    /// Master seed for every randomized step.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// JSON run configuration (tfidf, svm, forest, sentences, regimes, scoring).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Output directory for artifacts, reports and manifests.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,

    /// Report format printed to stdout.
    #[arg(long, global = true, value_enum, default_value_t = Format::Md)]
    pub format: Format,

    /// Worker threads for training (defaults to all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Md,
    Csv,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Parse, trim and docType-map a raw annotation export.
    Ingest(IngestArgs),
    /// Split curated records into train and test by service group size.
    Split(SplitArgs),
    /// Train a TF-IDF + classifier pipeline.
    Train(TrainArgs),
    /// Predict labels for curated records with a trained pipeline.
    Predict(PredictArgs),
    /// Metrics, confusion matrix and pairwise accuracy for a predictions file.
    Evaluate(EvaluateArgs),
    /// Distribution loss and regimes between privacy policies and terms.
    Overlap(OverlapArgs),
    /// Inter-annotator agreement on privacy-relevance labels.
    Kappa(KappaArgs),
    /// Analyze and score a whole document.
    Analyze(AnalyzeArgs),
}

#[derive(Args, Debug, Clone)]
pub struct IngestArgs {
    /// Raw export (.csv, .tsv or .jsonl).
    pub raw: PathBuf,
    /// Case taxonomy JSON ({"id": "description"}); copied to the output directory.
    #[arg(long)]
    pub taxonomy: Option<PathBuf>,
    /// DocType keyword mapping JSON; defaults to the built-in ruleset.
    #[arg(long)]
    pub mapping: Option<PathBuf>,
    /// Statuses to keep (repeatable); `any` keeps all.
    #[arg(long = "status", default_values_t = vec!["accepted".to_string()])]
    pub statuses: Vec<String>,
    #[arg(long)]
    pub keep_empty: bool,
    #[arg(long)]
    pub no_dedup: bool,
    /// Drop malformed rows instead of failing.
    #[arg(long)]
    pub skip_bad_rows: bool,
}

#[derive(Args, Debug, Clone)]
pub struct SplitArgs {
    /// Curated records; defaults to <out>/curated.jsonl.
    #[arg(long)]
    pub curated: Option<PathBuf>,
    #[arg(long, default_value_t = policy_overlap::corpus::DEFAULT_THRESHOLD)]
    pub threshold: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    Svm,
    Rf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum TaskArg {
    Case,
    Doctype,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SamplingArg {
    Normal,
    Oversample,
}

#[derive(Args, Debug, Clone)]
pub struct TrainArgs {
    #[arg(long, value_enum)]
    pub model: ModelArg,
    #[arg(long, value_enum)]
    pub task: TaskArg,
    #[arg(long, value_enum, default_value_t = SamplingArg::Normal)]
    pub sampling: SamplingArg,
    /// Training records; defaults to <out>/train.jsonl.
    #[arg(long)]
    pub train: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct PredictArgs {
    /// Trained pipeline file.
    #[arg(long)]
    pub model: PathBuf,
    /// Records to label; defaults to <out>/test.jsonl.
    #[arg(long)]
    pub input: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct EvaluateArgs {
    /// Predictions CSV (example_id,gold,predicted[,score][,doctype]).
    pub predictions: PathBuf,
    #[arg(long, value_enum)]
    pub task: TaskArg,
}

#[derive(Args, Debug, Clone)]
pub struct OverlapArgs {
    /// Case predictions CSV with a doctype column.
    pub predictions: PathBuf,
    #[arg(long)]
    pub min_count: Option<u64>,
    #[arg(long)]
    pub band: Option<u64>,
    /// Case ids to leave out of the regime analysis (repeatable).
    #[arg(long = "exclude")]
    pub exclude: Vec<usize>,
    /// Drop the abstain case from the frequency distributions.
    #[arg(long)]
    pub exclude_abstain: bool,
    /// Annotator labels CSV; enables the encroachment report.
    #[arg(long)]
    pub labels: Option<PathBuf>,
    #[arg(long)]
    pub taxonomy: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct KappaArgs {
    /// CSV with a case column and one 0/1 column per annotator.
    pub labels: PathBuf,
}

#[derive(Args, Debug, Clone)]
pub struct AnalyzeArgs {
    /// Plain text or HTML document.
    pub document: PathBuf,
    #[arg(long)]
    pub case_model: PathBuf,
    #[arg(long)]
    pub doctype_model: PathBuf,
    /// Scoring JSON; overrides the `scoring` section of --config.
    #[arg(long)]
    pub scoring: Option<PathBuf>,
    #[arg(long)]
    pub taxonomy: Option<PathBuf>,
}

/// Contents of the `--config` file. Every section is optional.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub tfidf: TfidfConfig,
    pub svm: SvmConfig,
    pub forest: ForestConfig,
    pub sentences: SentenceConfig,
    pub regimes: RegimeParams,
    pub scoring: Option<ScoringConfig>,
}

impl RunConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        if !path.is_file() {
            return Err(CliError::MissingArtifact {
                path: path.to_path_buf(),
                hint: "pass an existing JSON file to --config or drop the flag".into(),
            });
        }
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Usage(format!("{}: invalid config: {e}", path.display())))
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            tfidf: self.tfidf.clone(),
            svm: self.svm.clone(),
            forest: self.forest.clone(),
        }
    }
}

/// Everything a command needs besides its own arguments.
#[derive(Clone, Debug)]
pub struct Context {
    pub seed: u64,
    pub out: PathBuf,
    pub format: Format,
    pub threads: Option<usize>,
    pub config_path: Option<PathBuf>,
    pub config: RunConfig,
    /// Raw argument vector, recorded in manifests.
    pub args: Vec<String>,
}

impl Context {
    pub fn from_cli(cli: &Cli, args: Vec<String>) -> CliResult<Self> {
        let config = match &cli.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if cli.threads == Some(0) {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        Ok(Context {
            seed: cli.seed,
            out: cli.out.clone(),
            format: cli.format,
            threads: cli.threads,
            config_path: cli.config.clone(),
            config,
            args,
        })
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the rendered report.
pub fn run(args: Vec<String>) -> CliResult<String> {
    let cli = Cli::try_parse_from(&args).map_err(|e| CliError::Usage(e.to_string()))?;
    let ctx = Context::from_cli(&cli, args)?;
    commands::dispatch(&ctx, &cli.command)
}
