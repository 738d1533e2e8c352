//! Flat `key = value` configuration files.
//!
//! Precedence is: command-line flags over file entries over built-in
//! defaults. Within a file, a repeated key overrides earlier entries.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use crate::CliError;

/// Recognized configuration keys, mirroring the long command-line flags.
pub const KNOWN_KEYS: &[&str] = &[
    "data",
    "problem",
    "estimator",
    "theta",
    "epoch_len",
    "step",
    "regime",
    "seed",
    "epochs",
    "beta",
    "ref",
    "out",
    "tol",
    "max_iters",
];

/// Parsed contents of a configuration file.
#[derive(Debug, Default)]
pub struct FileConfig {
    entries: BTreeMap<String, String>,
}

impl FileConfig {
    /// Parses `key = value` lines. A `#` starts a comment, blank lines
    /// are skipped, and unknown keys are rejected.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut entries = BTreeMap::new();
        for (index, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let lineno = index + 1;
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Config(format!(
                    "config line {lineno}: expected key = value, got {raw:?}"
                ))
            })?;
            let key = key.trim();
            let value = value.trim();
            if !KNOWN_KEYS.contains(&key) {
                return Err(CliError::Config(format!(
                    "config line {lineno}: unknown key {key:?}"
                )));
            }
            if value.is_empty() {
                return Err(CliError::Config(format!(
                    "config line {lineno}: empty value for {key:?}"
                )));
            }
            entries.insert(key.to_string(), value.to_string());
        }
        Ok(FileConfig { entries })
    }

    /// Loads and parses the file at `path`.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Looks up a value by key.
    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }
}

/// Applies precedence for one setting: the flag wins over the file.
pub fn pick<'a>(flag: Option<&'a str>, file: &'a FileConfig, key: &str) -> Option<&'a str> {
    flag.or_else(|| file.get(key))
}
