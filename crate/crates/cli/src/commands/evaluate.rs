use std::path::PathBuf;

use clap::Args;

use authattr_core::corpus::{self, Split};
use authattr_core::ensemble::TrainMatrix;
use authattr_core::eval::{
    cross_validate, metrics, render_report, report_csv, report_plot_data, ConfusionMatrix,
    MetricsReport, ModelSpec, Variant,
};
use authattr_core::features::FeatureRow;

use crate::config::{self, FileConfig};
use crate::{CliError, HyperFlags};

#[derive(Args)]
pub struct EvaluateArgs {
    /// Corpus root (flat author layout).
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// Report directory (report.txt, report.csv, report_plot.csv).
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// `all` or a comma list of rf,rf-shap,gb,gb-shap,xgb,xgb-shap.
    #[arg(long)]
    models: Option<String>,
    /// Stratified k-fold evaluation.
    #[arg(long)]
    folds: Option<usize>,
    /// Single stratified holdout instead of folds.
    #[arg(long)]
    test_fraction: Option<f64>,
    #[arg(long)]
    no_dynamic: bool,
    /// Features kept by the *-shap variants.
    #[arg(long)]
    top_k: Option<usize>,
    #[command(flatten)]
    hyper: HyperFlags,
}

fn parse_models(text: &str) -> Result<Vec<Variant>, CliError> {
    if text == "all" {
        return Ok(Variant::ALL.to_vec());
    }
    text.split(',')
        .map(|t| super::train::parse_variant(t.trim()))
        .collect()
}

pub fn run(args: EvaluateArgs, cfg: &FileConfig, verbose: bool) -> Result<(), CliError> {
    let corpus_root = config::resolve_opt(args.corpus, cfg.get_str("corpus").map(PathBuf::from))
        .ok_or_else(|| CliError::Usage("evaluate needs --corpus".to_string()))?;
    let out_dir = config::resolve_opt(args.out_dir, cfg.get_str("out_dir").map(PathBuf::from))
        .ok_or_else(|| CliError::Usage("evaluate needs --out-dir".to_string()))?;
    let variants = parse_models(&config::resolve(
        args.models,
        cfg.get_str("models"),
        "all".to_string(),
    ))?;
    let folds = config::resolve_opt(args.folds, cfg.get("folds")?);
    let test_fraction = config::resolve_opt(args.test_fraction, cfg.get("test_fraction")?);
    let no_dynamic = args.no_dynamic || cfg.get_bool("no_dynamic")?.unwrap_or(false);
    let top_k = config::resolve(args.top_k, cfg.get("top_k")?, 30);
    let seed = config::resolve(args.hyper.seed, cfg.get("seed")?, 0);

    let toolchain = super::toolchain_from(no_dynamic, cfg.get_str("toolchain"), None);
    let (manifest, _, vectors) = super::extract_corpus(
        &corpus_root,
        authattr_core::corpus::CorpusLayout::FlatByAuthorDir,
        Some(&toolchain),
        4,
        verbose,
    )?;
    let rows: Vec<FeatureRow> = vectors
        .into_iter()
        .map(|vector| {
            let author_id = manifest.author_of(&vector.sample_id).unwrap_or("").to_string();
            FeatureRow { vector, author_id }
        })
        .collect();
    let matrix = TrainMatrix::from_feature_rows(&rows)?;

    let specs: Vec<ModelSpec> = variants
        .iter()
        .map(|&variant| {
            Ok(ModelSpec {
                variant,
                hyperparams: args.hyper.build(cfg, variant)?,
                top_k,
            })
        })
        .collect::<Result<_, CliError>>()?;

    let (reports, mode_label): (Vec<MetricsReport>, String) = match (folds, test_fraction) {
        (Some(k), _) => (
            cross_validate(&matrix, &specs, k, seed)?,
            format!("{k}-fold-cross-validation"),
        ),
        (None, fraction) => {
            let fraction = fraction.unwrap_or(0.25);
            let split = corpus::stratified_split(&manifest, fraction, seed)?;
            let train_idx: Vec<usize> = (0..rows.len())
                .filter(|&i| split.split_of(&rows[i].vector.sample_id) == Some(Split::Train))
                .collect();
            let test_idx: Vec<usize> = (0..rows.len())
                .filter(|&i| split.split_of(&rows[i].vector.sample_id) == Some(Split::Test))
                .collect();
            let train = matrix.subset(&train_idx);
            let mut out = Vec::new();
            for spec in &specs {
                let model = authattr_core::eval::train_variant(&train, spec)?;
                let pred = authattr_core::eval::predict_indices(&model, &matrix, &test_idx);
                let mut cm = ConfusionMatrix::zeros(matrix.classes.clone());
                for (&i, &p) in test_idx.iter().zip(&pred) {
                    cm.add(matrix.labels[i], p);
                }
                out.push(metrics(&cm, spec.variant.display_name())?);
            }
            (out, format!("holdout test_fraction={fraction}"))
        }
    };

    let model_names: Vec<String> = variants.iter().map(|v| v.flag_name().to_string()).collect();
    let mut pairs = vec![
        ("cmd", "evaluate".to_string()),
        ("models", model_names.join("+")),
        ("mode", mode_label.clone()),
        ("no_dynamic", no_dynamic.to_string()),
        ("top_k", top_k.to_string()),
        ("seed", seed.to_string()),
    ];
    for spec in &specs {
        pairs.push(("variant", spec.variant.flag_name().to_string()));
        pairs.extend(crate::hyper_hash_pairs(&spec.hyperparams));
    }
    let hash = config::config_hash(&pairs);
    let meta = format!("{}\n# evaluation={mode_label}", config::meta_line(seed, &hash));

    std::fs::create_dir_all(&out_dir)
        .map_err(|e| CliError::Data(format!("cannot create {}: {e}", out_dir.display())))?;
    let table = render_report(&reports);
    super::write_artifact(&out_dir.join("report.txt"), &meta, &table)?;
    super::write_artifact(&out_dir.join("report.csv"), &meta, &report_csv(&reports))?;
    super::write_artifact(
        &out_dir.join("report_plot.csv"),
        &meta,
        &report_plot_data(&reports),
    )?;
    print!("{table}");
    Ok(())
}
