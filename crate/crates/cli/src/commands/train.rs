use std::path::PathBuf;

use clap::Args;

use authattr_core::corpus::{CorpusManifest, Split};
use authattr_core::ensemble::TrainMatrix;
use authattr_core::eval::{ModelSpec, Variant};

use crate::config::{self, FileConfig};
use crate::{CliError, HyperFlags};

#[derive(Args)]
pub struct TrainArgs {
    /// Feature CSV from `extract`.
    #[arg(long)]
    features: Option<PathBuf>,
    /// Output model JSON.
    #[arg(long)]
    out: Option<PathBuf>,
    /// rf | rf-shap | gb | gb-shap | xgb | xgb-shap
    #[arg(long)]
    model: Option<String>,
    /// Manifest with split assignments; only train rows are used.
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Features kept by the *-shap variants.
    #[arg(long)]
    top_k: Option<usize>,
    #[command(flatten)]
    hyper: HyperFlags,
}

pub fn parse_variant(text: &str) -> Result<Variant, CliError> {
    Variant::parse(text).ok_or_else(|| {
        let names: Vec<&str> = Variant::ALL.iter().map(|v| v.flag_name()).collect();
        CliError::Usage(format!(
            "unknown model variant {text:?}; expected one of {}",
            names.join(", ")
        ))
    })
}

pub fn run(args: TrainArgs, cfg: &FileConfig, verbose: bool) -> Result<(), CliError> {
    let features = config::resolve_opt(args.features, cfg.get_str("features").map(PathBuf::from))
        .ok_or_else(|| CliError::Usage("train needs --features".to_string()))?;
    let out = config::resolve_opt(args.out, cfg.get_str("out").map(PathBuf::from))
        .ok_or_else(|| CliError::Usage("train needs --out".to_string()))?;
    let variant = parse_variant(&config::resolve(
        args.model,
        cfg.get_str("model"),
        "rf".to_string(),
    ))?;
    let top_k = config::resolve(args.top_k, cfg.get("top_k")?, 30);
    let hyperparams = args.hyper.build(cfg, variant)?;

    let mut rows = authattr_core::features::read_feature_csv(&features)?;
    if let Some(manifest_path) =
        config::resolve_opt(args.manifest, cfg.get_str("manifest").map(PathBuf::from))
    {
        let text = std::fs::read_to_string(&manifest_path).map_err(|e| {
            CliError::Data(format!("cannot read {}: {e}", manifest_path.display()))
        })?;
        let manifest = CorpusManifest::from_csv(&text)?;
        rows.retain(|r| manifest.split_of(&r.vector.sample_id) == Some(Split::Train));
    }
    let matrix = TrainMatrix::from_feature_rows(&rows)?;
    if verbose {
        eprintln!(
            "training {} on {} rows, {} classes",
            variant.display_name(),
            matrix.n_rows(),
            matrix.classes.len()
        );
    }
    let spec = ModelSpec {
        variant,
        hyperparams: hyperparams.clone(),
        top_k,
    };
    let model = authattr_core::eval::train_variant(&matrix, &spec)?;

    let mut pairs = vec![
        ("cmd", "train".to_string()),
        ("model", variant.flag_name().to_string()),
        ("top_k", top_k.to_string()),
    ];
    pairs.extend(crate::hyper_hash_pairs(&hyperparams));
    let hash = config::config_hash(&pairs);
    let meta = config::artifact_meta(hyperparams.seed, &hash);
    authattr_core::ensemble::save_model(&model, &meta, &out)?;
    println!(
        "trained {} on {} samples ({} classes) -> {}",
        variant.display_name(),
        matrix.n_rows(),
        matrix.classes.len(),
        out.display()
    );
    Ok(())
}
