use std::path::PathBuf;

use clap::Args;

use crate::config::{self, FileConfig};
use crate::CliError;

#[derive(Args)]
pub struct ExtractArgs {
    /// Corpus root (author directories) or manifest location.
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// flat | manifest
    #[arg(long)]
    layout: Option<String>,
    /// Output feature CSV.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Skip toolchain measurements; td_2..td_4 are masked.
    #[arg(long)]
    no_dynamic: bool,
    /// Compiler command template with {in}/{out} placeholders.
    #[arg(long)]
    toolchain: Option<String>,
    /// Execution timeout for dynamic measurement, in milliseconds.
    #[arg(long)]
    timeout_ms: Option<u64>,
    /// Dynamic-measurement worker pool width.
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Also dump the feature schema as JSON.
    #[arg(long)]
    schema_out: Option<PathBuf>,
    /// Expanded mode: sparse term-frequency families (JSON lines), outside
    /// the canonical schema.
    #[arg(long)]
    expanded_out: Option<PathBuf>,
}

pub fn run(args: ExtractArgs, cfg: &FileConfig, verbose: bool) -> Result<(), CliError> {
    let corpus = config::resolve_opt(args.corpus, cfg.get_str("corpus").map(PathBuf::from))
        .ok_or_else(|| CliError::Usage("extract needs --corpus".to_string()))?;
    let out = config::resolve_opt(args.out, cfg.get_str("out").map(PathBuf::from))
        .ok_or_else(|| CliError::Usage("extract needs --out".to_string()))?;
    let layout = super::parse_layout(&config::resolve(
        args.layout,
        cfg.get_str("layout"),
        "flat".to_string(),
    ))?;
    let no_dynamic = args.no_dynamic || cfg.get_bool("no_dynamic")?.unwrap_or(false);
    let workers = config::resolve(args.workers, cfg.get("workers")?, 4);
    let seed = config::resolve(args.seed, cfg.get("seed")?, 0);
    let toolchain = super::toolchain_from(
        no_dynamic,
        config::resolve_opt(args.toolchain, cfg.get_str("toolchain")),
        config::resolve_opt(args.timeout_ms, cfg.get("timeout_ms")?),
    );

    let (manifest, samples, vectors) =
        super::extract_corpus(&corpus, layout, Some(&toolchain), workers, verbose)?;
    let hash = config::config_hash(&[
        ("cmd", "extract".to_string()),
        ("no_dynamic", no_dynamic.to_string()),
        ("seed", seed.to_string()),
    ]);
    let meta = config::meta_line(seed, &hash);
    authattr_core::features::write_feature_csv(&vectors, &manifest, &out, Some(&meta))?;
    if let Some(expanded_out) = args.expanded_out {
        let mut body = format!("{}\n", serde_json::json!({ "meta": meta }));
        for sample in &samples {
            let tf = authattr_core::features::expanded_term_frequencies(&sample.body);
            body.push_str(&format!(
                "{}\n",
                serde_json::json!({ "sample_id": sample.sample_id, "term_frequencies": tf })
            ));
        }
        std::fs::write(&expanded_out, body).map_err(|e| {
            CliError::Data(format!("cannot write {}: {e}", expanded_out.display()))
        })?;
    }
    if let Some(schema_out) = args.schema_out {
        let body = format!(
            "{{\"meta\":\"{meta}\",\"features\":{}}}\n",
            authattr_core::features::schema_json().trim_end()
        );
        std::fs::write(&schema_out, body)
            .map_err(|e| CliError::Data(format!("cannot write {}: {e}", schema_out.display())))?;
    }
    println!(
        "extracted {} samples x {} features -> {}",
        vectors.len(),
        authattr_core::features::FEATURE_COUNT,
        out.display()
    );
    Ok(())
}
