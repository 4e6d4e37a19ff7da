//! Corpus ingestion, train/test splitting, and a synthetic corpus
//! generator for desk-scale experiments.
//!
//! On-disk layout is `root/<author_id>/<file>`; the directory name is the
//! canonical label. The manifest persists as CSV with header
//! `sample_id,author_id,path,split`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::csvio;

const CPP_EXTENSIONS: &[&str] = &["c", "cc", "cpp", "cxx", "h", "hpp"];

/// One labeled source file, body decoded lossily from UTF-8.
#[derive(Debug, Clone)]
pub struct SourceSample {
    pub sample_id: String,
    pub author_id: String,
    pub path: PathBuf,
    pub body: String,
    pub length_chars: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Split {
    Train,
    Test,
}

impl Split {
    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Test => "test",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub sample_id: String,
    pub author_id: String,
    pub rel_path: String,
    pub split: Split,
}

/// Ordered list of samples with author labels and split assignments.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CorpusManifest {
    pub entries: Vec<ManifestEntry>,
}

impl CorpusManifest {
    pub fn author_of(&self, sample_id: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|e| e.sample_id == sample_id)
            .map(|e| e.author_id.as_str())
    }

    pub fn split_of(&self, sample_id: &str) -> Option<Split> {
        self.entries
            .iter()
            .find(|e| e.sample_id == sample_id)
            .map(|e| e.split)
    }

    /// Sample ids grouped per author, preserving entry order.
    pub fn by_author(&self) -> BTreeMap<&str, Vec<&str>> {
        let mut map: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
        for e in &self.entries {
            map.entry(e.author_id.as_str())
                .or_default()
                .push(e.sample_id.as_str());
        }
        map
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("sample_id,author_id,path,split\n");
        for e in &self.entries {
            out.push_str(&csvio::write_row(&[
                e.sample_id.clone(),
                e.author_id.clone(),
                e.rel_path.clone(),
                e.split.as_str().to_string(),
            ]));
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self, CorpusError> {
        let mut entries = Vec::new();
        let mut saw_header = false;
        for (i, line) in text.lines().enumerate() {
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if !saw_header {
                saw_header = true;
                if !line.starts_with("sample_id,") {
                    return Err(CorpusError::MalformedManifest {
                        line: i + 1,
                        reason: "missing sample_id header".to_string(),
                    });
                }
                continue;
            }
            let fields = csvio::split_row(line);
            if fields.len() != 4 {
                return Err(CorpusError::MalformedManifest {
                    line: i + 1,
                    reason: format!("expected 4 fields, got {}", fields.len()),
                });
            }
            let split = match fields[3].as_str() {
                "train" => Split::Train,
                "test" => Split::Test,
                other => {
                    return Err(CorpusError::MalformedManifest {
                        line: i + 1,
                        reason: format!("unknown split {other:?}"),
                    })
                }
            };
            entries.push(ManifestEntry {
                sample_id: fields[0].clone(),
                author_id: fields[1].clone(),
                rel_path: fields[2].clone(),
                split,
            });
        }
        let mut seen = std::collections::BTreeSet::new();
        for e in &entries {
            if !seen.insert(e.sample_id.as_str()) {
                return Err(CorpusError::MalformedManifest {
                    line: 0,
                    reason: format!("duplicate sample_id {:?}", e.sample_id),
                });
            }
        }
        Ok(CorpusManifest { entries })
    }
}

/// Skipped file with the reason, reported alongside a successful load.
#[derive(Debug, Clone)]
pub struct LoadWarning {
    pub path: PathBuf,
    pub reason: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorpusLayout {
    FlatByAuthorDir,
    ManifestFile,
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("corpus root {0} is not readable: {1}")]
    UnreadableRoot(PathBuf, std::io::Error),
    #[error("manifest {0} is not readable: {1}")]
    UnreadableManifest(PathBuf, std::io::Error),
    #[error("malformed manifest at line {line}: {reason}")]
    MalformedManifest { line: usize, reason: String },
    #[error("author {0} has a single sample; stratified splitting needs at least 2")]
    SingleSampleAuthor(String),
    #[error("test_fraction must lie strictly between 0 and 1, got {0}")]
    BadFraction(f64),
    #[error("need at least 2 style profiles, got {0}")]
    TooFewProfiles(usize),
    #[error("samples_per_author must be at least 2, got {0}")]
    TooFewSamples(usize),
    #[error("io error at {0}: {1}")]
    Io(PathBuf, std::io::Error),
}

fn has_cpp_extension(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .map(|e| e.to_ascii_lowercase())
        .is_some_and(|e| CPP_EXTENSIONS.contains(&e.as_str()))
}

fn rel_path_string(base: &Path, path: &Path) -> String {
    let rel = path.strip_prefix(base).unwrap_or(path);
    rel.components()
        .map(|c| c.as_os_str().to_string_lossy())
        .collect::<Vec<_>>()
        .join("/")
}

/// Load a corpus from disk. Individual unreadable files become warnings;
/// an unreadable root is fatal. Sample order is lexicographic by relative
/// path, so repeated loads enumerate identically.
pub fn load_corpus(
    root: &Path,
    layout: CorpusLayout,
) -> Result<(CorpusManifest, Vec<SourceSample>, Vec<LoadWarning>), CorpusError> {
    match layout {
        CorpusLayout::FlatByAuthorDir => load_flat(root),
        CorpusLayout::ManifestFile => load_from_manifest(root),
    }
}

fn load_flat(
    root: &Path,
) -> Result<(CorpusManifest, Vec<SourceSample>, Vec<LoadWarning>), CorpusError> {
    let read = std::fs::read_dir(root).map_err(|e| CorpusError::UnreadableRoot(root.into(), e))?;
    let mut authors: Vec<PathBuf> = read
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.is_dir())
        .collect();
    authors.sort();

    let mut warnings = Vec::new();
    let mut files: Vec<(String, PathBuf)> = Vec::new();
    for author_dir in authors {
        let author = author_dir
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        for entry in walkdir::WalkDir::new(&author_dir)
            .sort_by_file_name()
            .into_iter()
        {
            match entry {
                Ok(e) if e.file_type().is_file() && has_cpp_extension(e.path()) => {
                    files.push((author.clone(), e.path().to_path_buf()));
                }
                Ok(_) => {}
                Err(err) => warnings.push(LoadWarning {
                    path: err.path().map(Path::to_path_buf).unwrap_or_default(),
                    reason: err.to_string(),
                }),
            }
        }
    }
    files.sort_by(|a, b| rel_path_string(root, &a.1).cmp(&rel_path_string(root, &b.1)));

    let mut entries = Vec::new();
    let mut samples = Vec::new();
    for (author, path) in files {
        let bytes = match std::fs::read(&path) {
            Ok(b) => b,
            Err(e) => {
                warnings.push(LoadWarning {
                    path,
                    reason: e.to_string(),
                });
                continue;
            }
        };
        let body = String::from_utf8_lossy(&bytes).into_owned();
        let sample_id = rel_path_string(root, &path);
        entries.push(ManifestEntry {
            sample_id: sample_id.clone(),
            author_id: author.clone(),
            rel_path: sample_id.clone(),
            split: Split::Train,
        });
        samples.push(SourceSample {
            sample_id,
            author_id: author,
            length_chars: body.chars().count(),
            body,
            path,
        });
    }
    Ok((CorpusManifest { entries }, samples, warnings))
}

fn load_from_manifest(
    root: &Path,
) -> Result<(CorpusManifest, Vec<SourceSample>, Vec<LoadWarning>), CorpusError> {
    let manifest_path = if root.is_file() {
        root.to_path_buf()
    } else {
        root.join("manifest.csv")
    };
    let base = manifest_path
        .parent()
        .map(Path::to_path_buf)
        .unwrap_or_default();
    let text = std::fs::read_to_string(&manifest_path)
        .map_err(|e| CorpusError::UnreadableManifest(manifest_path.clone(), e))?;
    let manifest = CorpusManifest::from_csv(&text)?;
    let mut samples = Vec::new();
    let mut warnings = Vec::new();
    for e in &manifest.entries {
        let path = base.join(&e.rel_path);
        match std::fs::read(&path) {
            Ok(bytes) => {
                let body = String::from_utf8_lossy(&bytes).into_owned();
                samples.push(SourceSample {
                    sample_id: e.sample_id.clone(),
                    author_id: e.author_id.clone(),
                    length_chars: body.chars().count(),
                    body,
                    path,
                });
            }
            Err(err) => warnings.push(LoadWarning {
                path,
                reason: err.to_string(),
            }),
        }
    }
    Ok((manifest, samples, warnings))
}

/// Per-author holdout: `round(n × fraction)` test samples, clamped to
/// `[1, n-1]`. Same seed, same split.
pub fn stratified_split(
    manifest: &CorpusManifest,
    test_fraction: f64,
    seed: u64,
) -> Result<CorpusManifest, CorpusError> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(CorpusError::BadFraction(test_fraction));
    }
    let by_author = manifest.by_author();
    for (author, ids) in &by_author {
        if ids.len() < 2 {
            return Err(CorpusError::SingleSampleAuthor(author.to_string()));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut test_ids: std::collections::BTreeSet<String> = Default::default();
    for (_, ids) in by_author {
        let n = ids.len();
        let k = ((n as f64 * test_fraction).round() as usize).clamp(1, n - 1);
        let mut shuffled: Vec<&str> = ids;
        shuffled.shuffle(&mut rng);
        for id in shuffled.into_iter().take(k) {
            test_ids.insert(id.to_string());
        }
    }
    let entries = manifest
        .entries
        .iter()
        .map(|e| ManifestEntry {
            split: if test_ids.contains(&e.sample_id) {
                Split::Test
            } else {
                Split::Train
            },
            ..e.clone()
        })
        .collect();
    Ok(CorpusManifest { entries })
}

// ---------------------------------------------------------------------------
// synthetic corpus
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IndentKind {
    Tabs,
    Spaces2,
    Spaces4,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BraceStyle {
    SameLine,
    NextLine,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NamingStyle {
    CamelCase,
    SnakeCase,
    UpperStart,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LoopKind {
    For,
    While,
}

/// Author persona for the generator; every field maps onto measurable
/// features, so distinctly configured personas yield separable vectors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StyleProfile {
    pub indent_kind: IndentKind,
    pub brace_style: BraceStyle,
    pub naming: NamingStyle,
    pub comment_density: f64,
    pub loop_preference: LoopKind,
    pub blank_line_rate: f64,
}

impl StyleProfile {
    fn indent_unit(&self) -> &'static str {
        match self.indent_kind {
            IndentKind::Tabs => "\t",
            IndentKind::Spaces2 => "  ",
            IndentKind::Spaces4 => "    ",
        }
    }
}

/// Eight hand-tuned, strongly distinct personas; indexes past the table
/// vary the comment and blank rates so any author count stays distinct.
pub fn default_profiles(n: usize) -> Vec<StyleProfile> {
    use BraceStyle::*;
    use IndentKind::*;
    use LoopKind::*;
    use NamingStyle::*;
    const BASE: [StyleProfile; 8] = [
        StyleProfile { indent_kind: Tabs, brace_style: SameLine, naming: CamelCase, comment_density: 0.0, loop_preference: For, blank_line_rate: 0.0 },
        StyleProfile { indent_kind: Spaces2, brace_style: NextLine, naming: SnakeCase, comment_density: 0.35, loop_preference: While, blank_line_rate: 0.3 },
        StyleProfile { indent_kind: Spaces4, brace_style: SameLine, naming: UpperStart, comment_density: 0.15, loop_preference: While, blank_line_rate: 0.1 },
        StyleProfile { indent_kind: Tabs, brace_style: NextLine, naming: SnakeCase, comment_density: 0.25, loop_preference: For, blank_line_rate: 0.2 },
        StyleProfile { indent_kind: Spaces2, brace_style: SameLine, naming: UpperStart, comment_density: 0.05, loop_preference: For, blank_line_rate: 0.15 },
        StyleProfile { indent_kind: Spaces4, brace_style: NextLine, naming: CamelCase, comment_density: 0.3, loop_preference: While, blank_line_rate: 0.05 },
        StyleProfile { indent_kind: Tabs, brace_style: SameLine, naming: SnakeCase, comment_density: 0.1, loop_preference: While, blank_line_rate: 0.25 },
        StyleProfile { indent_kind: Spaces2, brace_style: NextLine, naming: CamelCase, comment_density: 0.2, loop_preference: For, blank_line_rate: 0.0 },
    ];
    (0..n)
        .map(|i| {
            let mut p = BASE[i % 8];
            let round = (i / 8) as f64;
            p.comment_density = (p.comment_density + 0.07 * round).min(0.9);
            p.blank_line_rate = (p.blank_line_rate + 0.09 * round).min(0.9);
            p
        })
        .collect()
}

const WORDS: &[&str] = &[
    "count", "value", "index", "total", "item", "size", "temp", "result", "sum", "flag", "node",
    "grid", "limit", "step", "key", "cache", "depth", "width", "score", "delta", "best", "left",
    "right", "state", "queue",
];

const COMMENTS: &[&str] = &[
    "update the running total",
    "accumulate intermediate values",
    "clamp the result into range",
    "iterate over the work items",
    "combine both partial results",
    "prepare the loop bounds",
    "fold the remainder back in",
];

const INCLUDES: &[&str] = &["<iostream>", "<vector>", "<string>", "<algorithm>", "<cmath>"];

fn capitalize(w: &str) -> String {
    let mut cs = w.chars();
    match cs.next() {
        Some(f) => f.to_uppercase().collect::<String>() + cs.as_str(),
        None => String::new(),
    }
}

fn make_name(rng: &mut ChaCha8Rng, style: NamingStyle) -> String {
    let a = WORDS[rng.gen_range(0..WORDS.len())];
    let mut b = WORDS[rng.gen_range(0..WORDS.len())];
    while b == a {
        b = WORDS[rng.gen_range(0..WORDS.len())];
    }
    let digit = if rng.gen_bool(0.2) {
        format!("{}", rng.gen_range(2..9))
    } else {
        String::new()
    };
    match style {
        NamingStyle::CamelCase => format!("{a}{}{digit}", capitalize(b)),
        NamingStyle::SnakeCase => format!("{a}_{b}{digit}"),
        NamingStyle::UpperStart => format!("{}{}{digit}", capitalize(a), capitalize(b)),
    }
}

struct Emitter<'p> {
    out: String,
    profile: &'p StyleProfile,
    level: usize,
}

impl<'p> Emitter<'p> {
    fn new(profile: &'p StyleProfile) -> Self {
        Emitter {
            out: String::new(),
            profile,
            level: 0,
        }
    }

    fn line(&mut self, text: &str) {
        for _ in 0..self.level {
            self.out.push_str(self.profile.indent_unit());
        }
        self.out.push_str(text);
        self.out.push('\n');
    }

    fn blank(&mut self) {
        self.out.push('\n');
    }

    /// Structural blank between top-level items; compact personas
    /// (blank_line_rate 0) omit it entirely.
    fn section_break(&mut self) {
        if self.profile.blank_line_rate > 0.0 {
            self.blank();
        }
    }

    fn open(&mut self, header: &str) {
        match self.profile.brace_style {
            BraceStyle::SameLine => self.line(&format!("{header} {{")),
            BraceStyle::NextLine => {
                self.line(header);
                self.line("{");
            }
        }
        self.level += 1;
    }

    fn close(&mut self, suffix: &str) {
        self.level -= 1;
        self.line(&format!("}}{suffix}"));
    }

    fn maybe_comment(&mut self, rng: &mut ChaCha8Rng) {
        if rng.gen_bool(self.profile.comment_density) {
            let c = COMMENTS[rng.gen_range(0..COMMENTS.len())];
            self.line(&format!("// {c}"));
        }
    }

    fn maybe_blank(&mut self, rng: &mut ChaCha8Rng) {
        if rng.gen_bool(self.profile.blank_line_rate) {
            self.blank();
        }
    }
}

fn emit_loop(e: &mut Emitter, rng: &mut ChaCha8Rng, bound: &str, acc: &str) {
    match e.profile.loop_preference {
        LoopKind::For => {
            e.open(&format!("for (int i = 0; i < {bound}; i++)"));
            e.line(&format!("{acc} += i;"));
            if rng.gen_bool(0.4) {
                e.line(&format!("{acc} %= 97;"));
            }
            e.close("");
        }
        LoopKind::While => {
            e.line("int i = 0;");
            e.open(&format!("while (i < {bound})"));
            e.line(&format!("{acc} += i;"));
            if rng.gen_bool(0.4) {
                e.line(&format!("{acc} %= 97;"));
            }
            e.line("i++;");
            e.close("");
        }
    }
}

fn emit_function(e: &mut Emitter, rng: &mut ChaCha8Rng, name: &str, naming: NamingStyle) {
    let p1 = make_name(rng, naming);
    let p2 = make_name(rng, naming);
    let v1 = make_name(rng, naming);
    let acc = make_name(rng, naming);
    e.maybe_comment(rng);
    e.open(&format!("int {name}(int {p1}, int {p2})"));
    e.maybe_comment(rng);
    e.line(&format!(
        "int {v1} = {p1} * {} + {p2};",
        rng.gen_range(2..7)
    ));
    e.maybe_blank(rng);
    e.line(&format!("int {acc} = 0;"));
    e.maybe_comment(rng);
    emit_loop(e, rng, &v1, &acc);
    e.maybe_blank(rng);
    match rng.gen_range(0..3) {
        0 => {
            e.open(&format!("if ({acc} > {p2})"));
            e.line(&format!("{acc} -= {p2};"));
            e.close("");
        }
        1 => {
            e.open(&format!("if ({v1} % 2 == 0)"));
            e.line(&format!("{acc} += {p1};"));
            e.close("");
            e.open("else");
            e.line(&format!("{acc} -= 1;"));
            e.close("");
        }
        _ => {
            e.line(&format!("{acc} = {acc} * 2 - {p1};"));
        }
    }
    e.maybe_blank(rng);
    e.line(&format!("return {acc} + {v1};"));
    e.close("");
}

/// Generate one source file for a profile; deterministic in the rng state.
pub fn generate_sample(profile: &StyleProfile, rng: &mut ChaCha8Rng) -> String {
    let mut e = Emitter::new(profile);
    // main always streams to std::cout, so <iostream> is mandatory
    let mut picked: Vec<&str> = vec!["<iostream>"];
    let n_includes = rng.gen_range(1..=3);
    while picked.len() < n_includes {
        let inc = INCLUDES[rng.gen_range(0..INCLUDES.len())];
        if !picked.contains(&inc) {
            picked.push(inc);
        }
    }
    picked.sort_unstable();
    for inc in &picked {
        e.line(&format!("#include {inc}"));
    }
    e.section_break();
    if rng.gen_bool(0.3) {
        let g = make_name(rng, profile.naming);
        e.line(&format!("static int {g} = {};", rng.gen_range(1..100)));
        e.section_break();
    }
    let n_funcs = rng.gen_range(2..=3);
    let names: Vec<String> = (0..n_funcs)
        .map(|_| make_name(rng, profile.naming))
        .collect();
    for name in &names {
        emit_function(&mut e, rng, name, profile.naming);
        e.section_break();
    }
    let m1 = make_name(rng, profile.naming);
    let m2 = make_name(rng, profile.naming);
    e.maybe_comment(rng);
    e.open("int main()");
    e.line(&format!(
        "int {m1} = {}({}, {});",
        names[0],
        rng.gen_range(2..9),
        rng.gen_range(2..9)
    ));
    e.line(&format!(
        "int {m2} = {}({m1}, {});",
        names[1 % names.len()],
        rng.gen_range(2..9)
    ));
    e.maybe_blank(rng);
    e.maybe_comment(rng);
    e.line(&format!("std::cout << {m1} + {m2} << \"\\n\";"));
    e.line("return 0;");
    e.close("");
    e.out
}

/// Write a full synthetic corpus under `out_dir` in the flat author layout.
/// Deterministic under `seed`: same inputs, same bytes.
pub fn generate_synthetic_corpus(
    out_dir: &Path,
    profiles: &[StyleProfile],
    samples_per_author: usize,
    seed: u64,
) -> Result<CorpusManifest, CorpusError> {
    if profiles.len() < 2 {
        return Err(CorpusError::TooFewProfiles(profiles.len()));
    }
    if samples_per_author < 2 {
        return Err(CorpusError::TooFewSamples(samples_per_author));
    }
    let mut entries = Vec::new();
    for (ai, profile) in profiles.iter().enumerate() {
        let author = format!("author_{ai:02}");
        let dir = out_dir.join(&author);
        std::fs::create_dir_all(&dir).map_err(|e| CorpusError::Io(dir.clone(), e))?;
        for si in 0..samples_per_author {
            let mut file_seed = seed;
            file_seed = file_seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(ai as u64);
            file_seed = file_seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(si as u64);
            let mut rng = ChaCha8Rng::seed_from_u64(file_seed);
            let body = generate_sample(profile, &mut rng);
            let file = format!("s{si:02}.cpp");
            let path = dir.join(&file);
            std::fs::write(&path, &body).map_err(|e| CorpusError::Io(path.clone(), e))?;
            let mut sample_id = String::new();
            let _ = write!(sample_id, "{author}/{file}");
            entries.push(ManifestEntry {
                sample_id: sample_id.clone(),
                author_id: author.clone(),
                rel_path: sample_id,
                split: Split::Train,
            });
        }
    }
    Ok(CorpusManifest { entries })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_corpus(dir: &Path, spec: &[(&str, &[(&str, &str)])]) {
        for (author, files) in spec {
            let adir = dir.join(author);
            std::fs::create_dir_all(&adir).unwrap();
            for (name, body) in *files {
                std::fs::write(adir.join(name), body).unwrap();
            }
        }
    }

    #[test]
    fn load_two_authors_two_files_each() {
        let tmp = tempfile::tempdir().unwrap();
        write_corpus(
            tmp.path(),
            &[
                ("a", &[("one.cpp", "int x;"), ("two.cc", "int y;")]),
                ("b", &[("one.cpp", "int z;"), ("two.h", "int w;")]),
            ],
        );
        let (manifest, samples, warnings) =
            load_corpus(tmp.path(), CorpusLayout::FlatByAuthorDir).unwrap();
        assert_eq!(samples.len(), 4);
        assert!(warnings.is_empty());
        let authors: std::collections::BTreeSet<&str> =
            manifest.entries.iter().map(|e| e.author_id.as_str()).collect();
        assert_eq!(authors.len(), 2);
        // lexicographic by relative path
        let ids: Vec<&str> = manifest.entries.iter().map(|e| e.sample_id.as_str()).collect();
        let mut sorted = ids.clone();
        sorted.sort_unstable();
        assert_eq!(ids, sorted);
    }

    #[test]
    fn empty_directory_empty_manifest() {
        let tmp = tempfile::tempdir().unwrap();
        let (manifest, samples, warnings) =
            load_corpus(tmp.path(), CorpusLayout::FlatByAuthorDir).unwrap();
        assert!(manifest.entries.is_empty());
        assert!(samples.is_empty());
        assert!(warnings.is_empty());
    }

    #[test]
    fn eight_per_author_three_authors() {
        let tmp = tempfile::tempdir().unwrap();
        for author in ["a", "b", "c"] {
            for i in 0..8 {
                let dir = tmp.path().join(author);
                std::fs::create_dir_all(&dir).unwrap();
                std::fs::write(dir.join(format!("f{i}.cpp")), "int main(){}").unwrap();
            }
        }
        let (manifest, samples, _) =
            load_corpus(tmp.path(), CorpusLayout::FlatByAuthorDir).unwrap();
        assert_eq!(samples.len(), 24);
        assert_eq!(manifest.by_author().len(), 3);
        assert!(manifest.by_author().values().all(|v| v.len() == 8));
    }

    #[test]
    fn non_source_extensions_skipped_and_bad_utf8_replaced() {
        let tmp = tempfile::tempdir().unwrap();
        let dir = tmp.path().join("a");
        std::fs::create_dir_all(&dir).unwrap();
        std::fs::write(dir.join("keep.cpp"), b"int x;\xFF\xFEint y;").unwrap();
        std::fs::write(dir.join("skip.txt"), "not source").unwrap();
        std::fs::write(dir.join("skip.py"), "print()").unwrap();
        let second = tmp.path().join("b");
        std::fs::create_dir_all(&second).unwrap();
        std::fs::write(second.join("ok.cpp"), "int z;").unwrap();
        let (_, samples, warnings) =
            load_corpus(tmp.path(), CorpusLayout::FlatByAuthorDir).unwrap();
        assert_eq!(samples.len(), 2);
        assert!(warnings.is_empty());
        let bad = samples.iter().find(|s| s.sample_id.contains("keep")).unwrap();
        assert!(bad.body.contains('\u{FFFD}'), "lossy replacement applied");
        assert_eq!(bad.length_chars, bad.body.chars().count());
    }

    #[test]
    fn unreadable_root_is_fatal() {
        let err = load_corpus(Path::new("/nonexistent/nowhere"), CorpusLayout::FlatByAuthorDir);
        assert!(matches!(err, Err(CorpusError::UnreadableRoot(..))));
    }

    #[test]
    fn split_arithmetic_eight_per_author() {
        let tmp = tempfile::tempdir().unwrap();
        for author in ["a", "b"] {
            let dir = tmp.path().join(author);
            std::fs::create_dir_all(&dir).unwrap();
            for i in 0..8 {
                std::fs::write(dir.join(format!("f{i}.cpp")), "int x;").unwrap();
            }
        }
        let (manifest, _, _) = load_corpus(tmp.path(), CorpusLayout::FlatByAuthorDir).unwrap();
        let split = stratified_split(&manifest, 0.25, 7).unwrap();
        for (_, ids) in split.by_author() {
            let test = ids
                .iter()
                .filter(|id| split.split_of(id) == Some(Split::Test))
                .count();
            assert_eq!(test, 2, "round(8×0.25)=2 test per author");
            assert_eq!(ids.len() - test, 6);
        }
    }

    #[test]
    fn split_clamps_to_leave_one_train() {
        let tmp = tempfile::tempdir().unwrap();
        for author in ["a", "b"] {
            let dir = tmp.path().join(author);
            std::fs::create_dir_all(&dir).unwrap();
            for i in 0..2 {
                std::fs::write(dir.join(format!("f{i}.cpp")), "int x;").unwrap();
            }
        }
        let (manifest, _, _) = load_corpus(tmp.path(), CorpusLayout::FlatByAuthorDir).unwrap();
        let split = stratified_split(&manifest, 0.5, 3).unwrap();
        for (_, ids) in split.by_author() {
            let test = ids
                .iter()
                .filter(|id| split.split_of(id) == Some(Split::Test))
                .count();
            assert_eq!(test, 1, "2 samples at 0.5 → 1/1");
        }
    }

    #[test]
    fn split_is_deterministic_and_errors_on_singletons() {
        let manifest = CorpusManifest {
            entries: vec![
                ManifestEntry { sample_id: "a/1".into(), author_id: "a".into(), rel_path: "a/1".into(), split: Split::Train },
                ManifestEntry { sample_id: "a/2".into(), author_id: "a".into(), rel_path: "a/2".into(), split: Split::Train },
                ManifestEntry { sample_id: "a/3".into(), author_id: "a".into(), rel_path: "a/3".into(), split: Split::Train },
                ManifestEntry { sample_id: "b/1".into(), author_id: "b".into(), rel_path: "b/1".into(), split: Split::Train },
                ManifestEntry { sample_id: "b/2".into(), author_id: "b".into(), rel_path: "b/2".into(), split: Split::Train },
                ManifestEntry { sample_id: "b/3".into(), author_id: "b".into(), rel_path: "b/3".into(), split: Split::Train },
            ],
        };
        let s1 = stratified_split(&manifest, 0.34, 42).unwrap();
        let s2 = stratified_split(&manifest, 0.34, 42).unwrap();
        assert_eq!(s1.to_csv(), s2.to_csv(), "same seed, byte-identical");
        let s3 = stratified_split(&manifest, 0.34, 43).unwrap();
        assert!(s1 == s3 || s1.to_csv() != s3.to_csv()); // different seed may differ

        let single = CorpusManifest {
            entries: vec![
                ManifestEntry { sample_id: "solo/1".into(), author_id: "solo".into(), rel_path: "solo/1".into(), split: Split::Train },
                ManifestEntry { sample_id: "b/1".into(), author_id: "b".into(), rel_path: "b/1".into(), split: Split::Train },
                ManifestEntry { sample_id: "b/2".into(), author_id: "b".into(), rel_path: "b/2".into(), split: Split::Train },
            ],
        };
        match stratified_split(&single, 0.5, 1) {
            Err(CorpusError::SingleSampleAuthor(a)) => assert_eq!(a, "solo"),
            other => panic!("expected SingleSampleAuthor, got {other:?}"),
        }
    }

    #[test]
    fn manifest_round_trip_preserves_assignments() {
        let tmp = tempfile::tempdir().unwrap();
        write_corpus(
            tmp.path(),
            &[
                ("a", &[("1.cpp", "int a;"), ("2.cpp", "int b;"), ("3.cpp", "int c;")]),
                ("b", &[("1.cpp", "int d;"), ("2.cpp", "int e;")]),
            ],
        );
        let (manifest, _, _) = load_corpus(tmp.path(), CorpusLayout::FlatByAuthorDir).unwrap();
        let split = stratified_split(&manifest, 0.4, 5).unwrap();
        std::fs::write(tmp.path().join("manifest.csv"), split.to_csv()).unwrap();
        let (reloaded, samples, _) =
            load_corpus(tmp.path(), CorpusLayout::ManifestFile).unwrap();
        assert_eq!(reloaded, split);
        assert_eq!(samples.len(), 5);
        for s in &samples {
            assert_eq!(
                reloaded.author_of(&s.sample_id),
                manifest.author_of(&s.sample_id)
            );
        }
    }

    #[test]
    fn synthetic_counts_and_layout() {
        let tmp = tempfile::tempdir().unwrap();
        let profiles = default_profiles(8);
        let manifest =
            generate_synthetic_corpus(tmp.path(), &profiles, 8, 11).unwrap();
        assert_eq!(manifest.entries.len(), 64);
        let dirs: Vec<_> = std::fs::read_dir(tmp.path())
            .unwrap()
            .filter_map(|e| e.ok())
            .filter(|e| e.path().is_dir())
            .collect();
        assert_eq!(dirs.len(), 8);
    }

    #[test]
    fn tabs_profile_indents_with_tabs_only() {
        let profiles = default_profiles(8);
        assert_eq!(profiles[0].indent_kind, IndentKind::Tabs);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..4 {
            let body = generate_sample(&profiles[0], &mut rng);
            for line in body.lines() {
                if line.starts_with(' ') {
                    panic!("space-led line under tabs profile: {line:?}");
                }
                let trimmed = line.trim();
                if !trimmed.is_empty() && line != trimmed {
                    assert!(line.starts_with('\t'), "indented line must start with tab");
                }
            }
        }
    }

    #[test]
    fn next_line_brace_profile_sets_layout_flag() {
        // feature extractor as oracle over generated files
        let profiles = default_profiles(8);
        assert_eq!(profiles[1].brace_style, BraceStyle::NextLine);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let body = generate_sample(&profiles[1], &mut rng);
        let v = crate::features::extract_static(&body, "s");
        let tl_11 = crate::features::feature_index("tl_11").unwrap();
        assert_eq!(v.values[tl_11], 1.0, "body:\n{body}");
        // and the same-line persona reads false
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let body = generate_sample(&profiles[0], &mut rng);
        let v = crate::features::extract_static(&body, "s");
        assert_eq!(v.values[tl_11], 0.0);
    }

    #[test]
    fn generator_is_deterministic() {
        let tmp1 = tempfile::tempdir().unwrap();
        let tmp2 = tempfile::tempdir().unwrap();
        let profiles = default_profiles(3);
        generate_synthetic_corpus(tmp1.path(), &profiles, 2, 99).unwrap();
        generate_synthetic_corpus(tmp2.path(), &profiles, 2, 99).unwrap();
        for entry in walkdir::WalkDir::new(tmp1.path()) {
            let entry = entry.unwrap();
            if entry.file_type().is_file() {
                let rel = entry.path().strip_prefix(tmp1.path()).unwrap();
                let other = tmp2.path().join(rel);
                assert_eq!(
                    std::fs::read(entry.path()).unwrap(),
                    std::fs::read(&other).unwrap(),
                    "mismatch at {rel:?}"
                );
            }
        }
    }

    #[test]
    fn distinct_profiles_differ_in_controlled_features() {
        use crate::features::{extract_static, feature_index};
        let tmp = tempfile::tempdir().unwrap();
        let profiles = default_profiles(2); // tabs/camel/for/0.0 vs spaces2/snake/while/0.35
        generate_synthetic_corpus(tmp.path(), &profiles, 4, 21).unwrap();
        let (_, samples, _) = load_corpus(tmp.path(), CorpusLayout::FlatByAuthorDir).unwrap();
        let mean = |author: &str, feat: &str| {
            let idx = feature_index(feat).unwrap();
            let vals: Vec<f64> = samples
                .iter()
                .filter(|s| s.author_id == author)
                .map(|s| extract_static(&s.body, &s.sample_id).values[idx])
                .collect();
            vals.iter().sum::<f64>() / vals.len() as f64
        };
        assert!(mean("author_00", "tl_12") > mean("author_01", "tl_12")); // tabs
        assert!(mean("author_00", "ts_4") > mean("author_01", "ts_4")); // for vs while
        assert!(mean("author_00", "ts_2") < mean("author_01", "ts_2")); // comments
        assert!(mean("author_00", "ts_17") < mean("author_01", "ts_17")); // underscores
        assert!(mean("author_00", "tl_11") < mean("author_01", "tl_11")); // brace
        assert!(mean("author_00", "tl_3") < mean("author_01", "tl_3")); // blanks
    }

    #[test]
    fn rejects_degenerate_generator_inputs() {
        let tmp = tempfile::tempdir().unwrap();
        let profiles = default_profiles(1);
        assert!(matches!(
            generate_synthetic_corpus(tmp.path(), &profiles, 4, 1),
            Err(CorpusError::TooFewProfiles(1))
        ));
        let profiles = default_profiles(2);
        assert!(matches!(
            generate_synthetic_corpus(tmp.path(), &profiles, 1, 1),
            Err(CorpusError::TooFewSamples(1))
        ));
    }
}
