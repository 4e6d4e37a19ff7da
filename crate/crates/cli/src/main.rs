//! `authattr` — authorship-attribution pipeline over C/C++ corpora.
//!
//! Subcommands mirror the pipeline stages: `gen-corpus`, `extract`,
//! `train`, `predict`, `explain`, `evaluate`. A flat key=value config file
//! (`--config`) supplies defaults; command-line flags win. Exit codes:
//! 0 success, 1 usage error, 2 data error, 3 internal invariant violation.

mod commands;
mod config;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
    Internal(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Data(m) | CliError::Internal(m) => f.write_str(m),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Internal(_) => 3,
        }
    }
}

impl From<authattr_core::corpus::CorpusError> for CliError {
    fn from(e: authattr_core::corpus::CorpusError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<authattr_core::features::FeatureError> for CliError {
    fn from(e: authattr_core::features::FeatureError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<authattr_core::ensemble::ModelError> for CliError {
    fn from(e: authattr_core::ensemble::ModelError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<authattr_core::explain::ExplainError> for CliError {
    fn from(e: authattr_core::explain::ExplainError) -> Self {
        use authattr_core::explain::ExplainError as E;
        match &e {
            E::TooManyFeatures { .. } | E::BadTopK { .. } => CliError::Usage(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<authattr_core::eval::EvalError> for CliError {
    fn from(e: authattr_core::eval::EvalError) -> Self {
        use authattr_core::eval::EvalError as E;
        match &e {
            E::BadFolds(_) => CliError::Usage(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "authattr",
    version,
    about = "Stylometric authorship attribution for C/C++ source code"
)]
struct Cli {
    /// Flat key=value config file; flags override its entries.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Progress details on stderr.
    #[arg(short, long, global = true)]
    verbose: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize a style-controlled corpus for experiments.
    GenCorpus(commands::gen_corpus::GenCorpusArgs),
    /// Tokenize, parse, and measure every sample into a feature CSV.
    Extract(commands::extract::ExtractArgs),
    /// Train one of the six model variants on a feature CSV.
    Train(commands::train::TrainArgs),
    /// Attribute samples with a trained model.
    Predict(commands::predict::PredictArgs),
    /// Shapley-explain predictions and rank global feature importance.
    Explain(commands::explain::ExplainArgs),
    /// Compare model variants with a holdout split or k-fold.
    Evaluate(commands::evaluate::EvaluateArgs),
}

/// Shared training knobs. Unset values fall back to the config file, then
/// to the variant's defaults.
#[derive(Args, Clone, Default)]
pub struct HyperFlags {
    /// Trees per forest / boosting rounds.
    #[arg(long)]
    trees: Option<usize>,
    /// Maximum tree depth; 0 = unlimited.
    #[arg(long)]
    depth: Option<u32>,
    #[arg(long)]
    learning_rate: Option<f64>,
    /// L2 leaf regularization (regularized boosting).
    #[arg(long)]
    lambda: Option<f64>,
    /// Minimum split gain (regularized boosting).
    #[arg(long)]
    gamma: Option<f64>,
    /// Per-round row fraction (regularized boosting).
    #[arg(long)]
    subsample: Option<f64>,
    #[arg(long)]
    min_leaf: Option<usize>,
    /// Split candidates per node; forests default to ceil(sqrt(m)).
    #[arg(long)]
    feature_subsample: Option<usize>,
    /// Train forest trees on the full sample instead of bootstrap resamples.
    #[arg(long)]
    no_bootstrap: bool,
    #[arg(long)]
    seed: Option<u64>,
}

impl HyperFlags {
    pub fn build(
        &self,
        cfg: &config::FileConfig,
        variant: authattr_core::eval::Variant,
    ) -> Result<authattr_core::ensemble::Hyperparams, CliError> {
        let mut hp = variant.default_hyperparams();
        hp.n_trees = config::resolve(self.trees, cfg.get("trees")?, hp.n_trees);
        if let Some(d) = self.depth.or(cfg.get::<u32>("depth")?) {
            hp.max_depth = if d == 0 { None } else { Some(d) };
        }
        hp.learning_rate =
            config::resolve(self.learning_rate, cfg.get("learning_rate")?, hp.learning_rate);
        hp.lambda = config::resolve(self.lambda, cfg.get("lambda")?, hp.lambda);
        hp.gamma = config::resolve(self.gamma, cfg.get("gamma")?, hp.gamma);
        hp.subsample = config::resolve(self.subsample, cfg.get("subsample")?, hp.subsample);
        hp.min_samples_leaf =
            config::resolve(self.min_leaf, cfg.get("min_leaf")?, hp.min_samples_leaf);
        hp.feature_subsample =
            config::resolve_opt(self.feature_subsample, cfg.get("feature_subsample")?);
        if self.no_bootstrap || cfg.get_bool("no_bootstrap")?.unwrap_or(false) {
            hp.bootstrap = false;
        }
        hp.seed = config::resolve(self.seed, cfg.get("seed")?, 0);
        Ok(hp)
    }
}

/// Canonical hash pairs for a hyperparameter set.
pub fn hyper_hash_pairs(
    hp: &authattr_core::ensemble::Hyperparams,
) -> Vec<(&'static str, String)> {
    vec![
        ("trees", hp.n_trees.to_string()),
        (
            "depth",
            hp.max_depth.map_or("none".to_string(), |d| d.to_string()),
        ),
        ("learning_rate", hp.learning_rate.to_string()),
        ("lambda", hp.lambda.to_string()),
        ("gamma", hp.gamma.to_string()),
        ("subsample", hp.subsample.to_string()),
        (
            "feature_subsample",
            hp.feature_subsample
                .map_or("auto".to_string(), |f| f.to_string()),
        ),
        ("min_leaf", hp.min_samples_leaf.to_string()),
        ("bootstrap", hp.bootstrap.to_string()),
        ("seed", hp.seed.to_string()),
    ]
}

fn load_config(path: Option<&PathBuf>) -> Result<config::FileConfig, CliError> {
    match path {
        Some(p) => config::FileConfig::load(p),
        None => Ok(config::FileConfig::default()),
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = load_config(cli.config.as_ref())?;
    match cli.command {
        Command::GenCorpus(args) => commands::gen_corpus::run(args, &cfg, cli.verbose),
        Command::Extract(args) => commands::extract::run(args, &cfg, cli.verbose),
        Command::Train(args) => commands::train::run(args, &cfg, cli.verbose),
        Command::Predict(args) => commands::predict::run(args, &cfg, cli.verbose),
        Command::Explain(args) => commands::explain::run(args, &cfg, cli.verbose),
        Command::Evaluate(args) => commands::evaluate::run(args, &cfg, cli.verbose),
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
