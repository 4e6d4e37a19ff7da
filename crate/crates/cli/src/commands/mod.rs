pub mod evaluate;
pub mod explain;
pub mod extract;
pub mod gen_corpus;
pub mod predict;
pub mod train;

use std::io::Write as _;
use std::path::Path;

use authattr_core::corpus::{CorpusLayout, CorpusManifest, SourceSample};
use authattr_core::dynamic::{self, ToolchainConfig};
use authattr_core::features::{self, FeatureVector};
use rayon::prelude::*;

use crate::CliError;

/// Write a text artifact with its `#` meta header as the first line.
pub fn write_artifact(path: &Path, meta_line: &str, body: &str) -> Result<(), CliError> {
    let mut file = std::fs::File::create(path)
        .map_err(|e| CliError::Data(format!("cannot create {}: {e}", path.display())))?;
    write!(file, "# {meta_line}\n{body}")
        .map_err(|e| CliError::Data(format!("cannot write {}: {e}", path.display())))
}

pub fn parse_layout(text: &str) -> Result<CorpusLayout, CliError> {
    match text {
        "flat" => Ok(CorpusLayout::FlatByAuthorDir),
        "manifest" => Ok(CorpusLayout::ManifestFile),
        other => Err(CliError::Usage(format!(
            "unknown layout {other:?}; expected flat or manifest"
        ))),
    }
}

/// Load a corpus and extract every sample. Static features run in
/// parallel; dynamic measurements, when enabled, run on a bounded pool and
/// overlay the td slots. Per-file problems are warnings, never fatal.
pub fn extract_corpus(
    root: &Path,
    layout: CorpusLayout,
    toolchain: Option<&ToolchainConfig>,
    workers: usize,
    verbose: bool,
) -> Result<(CorpusManifest, Vec<SourceSample>, Vec<FeatureVector>), CliError> {
    let (manifest, samples, warnings) = authattr_core::corpus::load_corpus(root, layout)?;
    for w in &warnings {
        eprintln!("warning: skipped {}: {}", w.path.display(), w.reason);
    }
    if verbose {
        eprintln!(
            "extracting {} samples from {} authors",
            samples.len(),
            manifest.by_author().len()
        );
    }
    let mut vectors: Vec<FeatureVector> = samples
        .par_iter()
        .map(|s| features::extract_static(&s.body, &s.sample_id))
        .collect();
    if let Some(cfg) = toolchain {
        if cfg.enabled {
            let inputs: Vec<(SourceSample, authattr_core::ast::PseudoAst)> = samples
                .par_iter()
                .map(|s| {
                    let ts = authattr_core::lexer::tokenize(&s.body);
                    (s.clone(), authattr_core::ast::parse(&ts))
                })
                .collect();
            let results = dynamic::run_dynamic_batch(&inputs, cfg, workers);
            for (vector, result) in vectors.iter_mut().zip(&results) {
                for d in &result.diagnostics {
                    eprintln!("warning: {}: {d}", vector.sample_id);
                }
                for (i, (value, available)) in result.slots().iter().enumerate() {
                    vector.values[features::LAYOUT_COUNT + i] =
                        if *available { *value } else { 0.0 };
                    vector.mask[features::LAYOUT_COUNT + i] = *available;
                }
            }
        }
    }
    Ok((manifest, samples, vectors))
}

/// Toolchain config from flags, the config file, and `AUTHATT_TOOLCHAIN`.
pub fn toolchain_from(
    no_dynamic: bool,
    toolchain_flag: Option<String>,
    timeout_ms: Option<u64>,
) -> ToolchainConfig {
    let mut cfg = ToolchainConfig::from_env();
    if let Some(cmd) = toolchain_flag {
        cfg.compiler_command = cmd;
    }
    if let Some(ms) = timeout_ms {
        cfg.run_timeout = std::time::Duration::from_millis(ms.max(1));
    }
    cfg.enabled = !no_dynamic;
    cfg
}
