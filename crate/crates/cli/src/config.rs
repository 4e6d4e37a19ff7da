//! Run configuration: flat key=value config files, flag/file/default
//! resolution, and the artifact header line.
//!
//! Every output file starts with a header recording tool version, schema
//! version, seed, and a hash of the semantically relevant configuration.
//! Paths are deliberately excluded from the hash so artifacts stay
//! byte-identical across checkouts and machines.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::CliError;

/// Parsed `key = value` config file. Keys use snake_case; `#` lines are
/// comments.
#[derive(Debug, Default, Clone)]
pub struct FileConfig {
    values: BTreeMap<String, String>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Data(format!("cannot read config {}: {e}", path.display())))?;
        let mut values = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::Usage(format!(
                    "config {} line {}: expected key = value",
                    path.display(),
                    i + 1
                )));
            };
            values.insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(FileConfig { values })
    }

    pub fn get_str(&self, key: &str) -> Option<String> {
        self.values.get(key).cloned()
    }

    pub fn get<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, CliError> {
        match self.values.get(key) {
            None => Ok(None),
            Some(raw) => raw.parse::<T>().map(Some).map_err(|_| {
                CliError::Usage(format!("config key {key}: cannot parse {raw:?}"))
            }),
        }
    }

    pub fn get_bool(&self, key: &str) -> Result<Option<bool>, CliError> {
        match self.values.get(key).map(String::as_str) {
            None => Ok(None),
            Some("true" | "1" | "yes") => Ok(Some(true)),
            Some("false" | "0" | "no") => Ok(Some(false)),
            Some(other) => Err(CliError::Usage(format!(
                "config key {key}: expected a boolean, got {other:?}"
            ))),
        }
    }
}

/// Flag beats config beats default.
pub fn resolve<T>(flag: Option<T>, file: Option<T>, default: T) -> T {
    flag.or(file).unwrap_or(default)
}

pub fn resolve_opt<T>(flag: Option<T>, file: Option<T>) -> Option<T> {
    flag.or(file)
}

/// FNV-1a over a canonical key=value string.
pub fn fnv1a64(text: &str) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for byte in text.bytes() {
        hash ^= u64::from(byte);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

/// Hash the non-path configuration of one command run.
pub fn config_hash(pairs: &[(&str, String)]) -> String {
    let mut canonical = String::new();
    for (k, v) in pairs {
        let _ = write!(canonical, "{k}={v};");
    }
    format!("{:016x}", fnv1a64(&canonical))
}

/// The header line written (behind `#`) at the top of every text artifact.
pub fn meta_line(seed: u64, config_hash: &str) -> String {
    format!(
        "authattr {} schema={} seed={} config={}",
        authattr_core::TOOL_VERSION,
        authattr_core::SCHEMA_VERSION,
        seed,
        config_hash
    )
}

pub fn artifact_meta(seed: u64, config_hash: &str) -> authattr_core::ensemble::ArtifactMeta {
    authattr_core::ensemble::ArtifactMeta {
        tool_version: authattr_core::TOOL_VERSION.to_string(),
        schema_version: authattr_core::SCHEMA_VERSION.to_string(),
        seed,
        config_hash: config_hash.to_string(),
    }
}
