//! Run configuration: a flat `key = value` file merged under command-line flags.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::error::CliError;

pub const DATA_DIR_ENV: &str = "BOLTZKIT_DATA_DIR";

/// Keys accepted in a config file; `_` and `-` are interchangeable.
pub const KEYS: [&str; 15] = [
    "dataset",
    "data-dir",
    "nodes",
    "max-iter",
    "finetune-iter",
    "batch-size",
    "step-ratio",
    "objective",
    "cd-k",
    "seed",
    "model-out",
    "metrics-out",
    "train-limit",
    "units",
    "timings",
];

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConfigFile {
    values: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn parse(text: &str, origin: &str) -> Result<Self, CliError> {
        let mut values = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::usage(format!("{origin}:{}: expected 'key = value'", n + 1)))?;
            let key = key.trim().to_ascii_lowercase().replace('_', "-");
            if !KEYS.contains(&key.as_str()) {
                return Err(CliError::usage(format!(
                    "{origin}:{}: unknown key '{key}' (valid: {})",
                    n + 1,
                    KEYS.join(", ")
                )));
            }
            if values.insert(key.clone(), value.trim().to_string()).is_some() {
                return Err(CliError::usage(format!("{origin}:{}: '{key}' set twice", n + 1)));
            }
        }
        Ok(ConfigFile { values })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    /// The flag value if given, else the parsed config value, else `None`.
    pub fn pick<T: std::str::FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, CliError>
    where
        T::Err: std::fmt::Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        self.get(key)
            .map(|v| v.parse::<T>().map_err(|e| CliError::usage(format!("config key '{key}': {e}"))))
            .transpose()
    }
}

/// Parses `784,100,10`, `784 100 10` or `[784 100 10]`.
pub fn parse_nodes(s: &str) -> Result<Vec<usize>, String> {
    let nodes = s
        .trim_matches(|c| c == '[' || c == ']')
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| match t.parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(format!("'{t}' is not a positive layer size")),
        })
        .collect::<Result<Vec<_>, _>>()?;
    if nodes.len() < 2 {
        return Err(format!("need at least 2 layer sizes, got {}", nodes.len()));
    }
    Ok(nodes)
}

/// Flag, then config, then `BOLTZKIT_DATA_DIR`.
pub fn resolve_data_dir(flag: Option<PathBuf>, config: &ConfigFile) -> Option<PathBuf> {
    flag.or_else(|| config.get("data-dir").map(PathBuf::from))
        .or_else(|| std::env::var_os(DATA_DIR_ENV).map(PathBuf::from))
}
