use std::path::PathBuf;

use clap::Args;

use crate::config::{self, FileConfig};
use crate::CliError;

#[derive(Args)]
pub struct GenCorpusArgs {
    /// Output directory; receives author subdirectories and manifest.csv.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Number of synthetic authors (style personas).
    #[arg(long)]
    authors: Option<usize>,
    #[arg(long)]
    samples_per_author: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

pub fn run(args: GenCorpusArgs, cfg: &FileConfig, verbose: bool) -> Result<(), CliError> {
    let out = config::resolve_opt(args.out, cfg.get_str("out").map(PathBuf::from))
        .ok_or_else(|| CliError::Usage("gen-corpus needs --out".to_string()))?;
    let authors = config::resolve(args.authors, cfg.get("authors")?, 8);
    let samples = config::resolve(args.samples_per_author, cfg.get("samples_per_author")?, 8);
    let seed = config::resolve(args.seed, cfg.get("seed")?, 0);

    let profiles = authattr_core::corpus::default_profiles(authors);
    let manifest =
        authattr_core::corpus::generate_synthetic_corpus(&out, &profiles, samples, seed)?;
    let hash = config::config_hash(&[
        ("cmd", "gen-corpus".to_string()),
        ("authors", authors.to_string()),
        ("samples_per_author", samples.to_string()),
        ("seed", seed.to_string()),
    ]);
    super::write_artifact(
        &out.join("manifest.csv"),
        &config::meta_line(seed, &hash),
        &manifest.to_csv(),
    )?;
    if verbose {
        eprintln!(
            "wrote {} files for {authors} authors under {}",
            manifest.entries.len(),
            out.display()
        );
    }
    println!(
        "generated corpus: {} samples, {} authors, manifest {}",
        manifest.entries.len(),
        authors,
        out.join("manifest.csv").display()
    );
    Ok(())
}
