use std::path::PathBuf;

use clap::Args;

use authattr_core::explain::{
    exact_shapley, global_importance, tree_shapley, BackgroundSet, ShapExplanation,
    EXACT_FEATURE_LIMIT,
};
use authattr_core::features::SCHEMA;

use crate::config::{self, FileConfig};
use crate::CliError;

/// Local-accuracy tolerance enforced on every emitted explanation.
const LOCAL_ACCURACY_TOL: f64 = 1e-6;

#[derive(Args)]
pub struct ExplainArgs {
    /// Trained model JSON.
    #[arg(long)]
    model: Option<PathBuf>,
    /// Feature CSV of the samples to explain.
    #[arg(long)]
    features: Option<PathBuf>,
    /// Output explanations (JSON lines, one object per sample).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output global importance CSV.
    #[arg(long)]
    importance: Option<PathBuf>,
    /// Exact subset enumeration instead of the tree walk (≤ 20 features).
    #[arg(long)]
    exact: bool,
    /// Background rows sampled from the feature file.
    #[arg(long)]
    background_size: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

pub fn run(args: ExplainArgs, cfg: &FileConfig, verbose: bool) -> Result<(), CliError> {
    let model_path = config::resolve_opt(args.model, cfg.get_str("model_path").map(PathBuf::from))
        .ok_or_else(|| CliError::Usage("explain needs --model".to_string()))?;
    let features = config::resolve_opt(args.features, cfg.get_str("features").map(PathBuf::from))
        .ok_or_else(|| CliError::Usage("explain needs --features".to_string()))?;
    let out = config::resolve_opt(args.out, cfg.get_str("out").map(PathBuf::from))
        .ok_or_else(|| CliError::Usage("explain needs --out".to_string()))?;
    let importance_out =
        config::resolve_opt(args.importance, cfg.get_str("importance").map(PathBuf::from))
            .ok_or_else(|| CliError::Usage("explain needs --importance".to_string()))?;
    let bg_size = config::resolve(
        args.background_size,
        cfg.get("background_size")?,
        authattr_core::explain::DEFAULT_BACKGROUND_SIZE,
    );
    let seed = config::resolve(args.seed, cfg.get("seed")?, 0);
    let exact = args.exact || cfg.get_bool("exact")?.unwrap_or(false);

    let (model, _) = authattr_core::ensemble::load_model(&model_path)?;
    let rows = authattr_core::features::read_feature_csv(&features)?;
    let active = model.active_features();
    if exact && active.len() > EXACT_FEATURE_LIMIT {
        return Err(CliError::Usage(format!(
            "--exact enumerates 2^m coalitions and is limited to {EXACT_FEATURE_LIMIT} active \
             features; this model has {}. Drop --exact to use the tree walk.",
            active.len()
        )));
    }

    // background set: seeded sample of the (imputed) explained rows
    let imputed: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| model.impute_row(&r.vector.values, &r.vector.mask))
        .collect();
    if imputed.is_empty() {
        return Err(CliError::Data("no rows to explain".to_string()));
    }
    let bg = BackgroundSet::sample_from_rows(&imputed, bg_size, seed);

    let hash = config::config_hash(&[
        ("cmd", "explain".to_string()),
        ("exact", exact.to_string()),
        ("background_size", bg_size.to_string()),
        ("seed", seed.to_string()),
    ]);
    let meta = config::meta_line(seed, &hash);

    let mut body = format!("{}\n", serde_json::json!({ "meta": meta }));
    let mut violations = 0usize;
    for (row, x) in rows.iter().zip(&imputed) {
        let probs = model.probabilities(x);
        let class = probs
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap_or(std::cmp::Ordering::Equal))
            .map(|(i, _)| i)
            .unwrap_or(0);
        let explanation: ShapExplanation = if exact {
            exact_shapley(&model, x, &bg, class)?
        } else {
            tree_shapley(&model, x, &bg, class)
        };
        if explanation.local_accuracy_gap() > LOCAL_ACCURACY_TOL {
            violations += 1;
            eprintln!(
                "local accuracy violated for {}: gap {}",
                row.vector.sample_id,
                explanation.local_accuracy_gap()
            );
        }
        let attributions: Vec<serde_json::Value> = explanation
            .features
            .iter()
            .zip(&explanation.phi)
            .map(|(&f, &phi)| {
                serde_json::json!({
                    "feature_id": SCHEMA.get(f).map_or("?", |d| d.id),
                    "value": x[f],
                    "phi": phi,
                })
            })
            .collect();
        body.push_str(&format!(
            "{}\n",
            serde_json::json!({
                "sample_id": row.vector.sample_id,
                "class": model.classes[class],
                "base_value": explanation.base_value,
                "attributions": attributions,
            })
        ));
    }
    std::fs::write(&out, &body)
        .map_err(|e| CliError::Data(format!("cannot write {}: {e}", out.display())))?;

    let ranked = global_importance(&model, &imputed, &bg);
    let mut imp = String::from("feature_id,mean_abs_phi\n");
    for (f, score) in &ranked {
        imp.push_str(&format!(
            "{},{}\n",
            SCHEMA.get(*f).map_or("?", |d| d.id),
            authattr_core::csvio::fmt_sig9(*score)
        ));
    }
    super::write_artifact(&importance_out, &meta, &imp)?;
    if verbose {
        eprintln!("explained {} samples, {} violations", rows.len(), violations);
    }
    if violations > 0 {
        return Err(CliError::Internal(format!(
            "{violations} explanation(s) violated local accuracy beyond {LOCAL_ACCURACY_TOL}"
        )));
    }
    println!(
        "explained {} samples -> {} (importance {})",
        rows.len(),
        out.display(),
        importance_out.display()
    );
    Ok(())
}
