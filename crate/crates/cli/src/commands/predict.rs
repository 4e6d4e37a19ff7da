use std::path::PathBuf;

use clap::Args;

use crate::config::{self, FileConfig};
use crate::CliError;

#[derive(Args)]
pub struct PredictArgs {
    /// Trained model JSON.
    #[arg(long)]
    model: Option<PathBuf>,
    /// Feature CSV of the samples to attribute.
    #[arg(long)]
    features: Option<PathBuf>,
    /// Output predictions CSV.
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn run(args: PredictArgs, cfg: &FileConfig, verbose: bool) -> Result<(), CliError> {
    let model_path = config::resolve_opt(args.model, cfg.get_str("model_path").map(PathBuf::from))
        .ok_or_else(|| CliError::Usage("predict needs --model".to_string()))?;
    let features = config::resolve_opt(args.features, cfg.get_str("features").map(PathBuf::from))
        .ok_or_else(|| CliError::Usage("predict needs --features".to_string()))?;
    let out = config::resolve_opt(args.out, cfg.get_str("out").map(PathBuf::from))
        .ok_or_else(|| CliError::Usage("predict needs --out".to_string()))?;

    let (model, model_meta) = authattr_core::ensemble::load_model(&model_path)?;
    let rows = authattr_core::features::read_feature_csv(&features)?;
    if verbose {
        eprintln!("predicting {} samples", rows.len());
    }
    let hash = config::config_hash(&[
        ("cmd", "predict".to_string()),
        ("model_config", model_meta.config_hash.clone()),
    ]);
    let mut body = String::from("sample_id,predicted_author,probability,probabilities\n");
    for row in &rows {
        let p = model.predict(&row.vector)?;
        let probs_json = serde_json::to_string(&p.probabilities)
            .map_err(|e| CliError::Internal(e.to_string()))?;
        body.push_str(&authattr_core::csvio::write_row(&[
            row.vector.sample_id.clone(),
            p.author_id.clone(),
            authattr_core::csvio::fmt_sig9(p.probabilities[p.class_index]),
            probs_json,
        ]));
        body.push('\n');
    }
    super::write_artifact(&out, &config::meta_line(model_meta.seed, &hash), &body)?;
    println!("wrote {} predictions -> {}", rows.len(), out.display());
    Ok(())
}
