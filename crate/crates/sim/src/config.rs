//! Flat `key = value` config files. Keys are the long flag names of `sweep`; `#` starts a comment.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::HarnessError;

pub const KEYS: [&str; 16] = [
    "M",
    "Kt",
    "Kr",
    "N",
    "Ps",
    "Pr",
    "T",
    "sweep",
    "grid",
    "trials",
    "seed",
    "out",
    "entry-variance",
    "rx-array",
    "threads",
    "progress",
];

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ConfigFile {
    values: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self, HarnessError> {
        let mut values = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(HarnessError::Config(format!(
                    "line {}: expected `key = value`",
                    lineno + 1
                )));
            };
            let key = key.trim();
            if !KEYS.contains(&key) {
                return Err(HarnessError::Config(format!(
                    "line {}: unknown key `{key}`",
                    lineno + 1
                )));
            }
            if values
                .insert(key.to_string(), value.trim().to_string())
                .is_some()
            {
                return Err(HarnessError::Config(format!(
                    "line {}: duplicate key `{key}`",
                    lineno + 1
                )));
            }
        }
        Ok(Self { values })
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        Self::parse(&text)
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    /// Parsed value of `key`, if present.
    pub fn get<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, HarnessError> {
        self.raw(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|_| HarnessError::Config(format!("bad value `{v}` for `{key}`")))
            })
            .transpose()
    }
}
