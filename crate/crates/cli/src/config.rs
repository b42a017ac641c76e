//! Flat `key=value` configuration merged with command-line flags, and typed
//! validation that reports every problem at once.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use crate::error::CliError;

/// Environment variable consulted when no seed is given.
pub const SEED_ENV: &str = "TIMEROBUST_SEED";
pub const DEFAULT_REPS: u64 = 10_000;
pub const DEFAULT_SEED: u64 = 0;

/// Untyped settings; later sources override earlier ones.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawConfig {
    values: BTreeMap<String, String>,
}

impl RawConfig {
    /// Parses `key = value` lines. Blank lines and lines starting with `#`
    /// are ignored; keys may use `-` or `_`.
    pub fn parse(text: &str) -> Result<Self, Vec<String>> {
        let mut values = BTreeMap::new();
        let mut errors = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            match line.split_once('=') {
                Some((k, v)) if !k.trim().is_empty() => {
                    values.insert(normalize_key(k), v.trim().to_string());
                }
                _ => errors.push(format!("config line {}: expected key=value, got `{line}`", i + 1)),
            }
        }
        if errors.is_empty() {
            Ok(Self { values })
        } else {
            Err(errors)
        }
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text).map_err(CliError::Validation)
    }

    pub fn set(&mut self, key: &str, value: Option<String>) {
        if let Some(v) = value {
            self.values.insert(normalize_key(key), v);
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(&normalize_key(key)).map(String::as_str)
    }

    /// Sorted `key=value` lines; the canonical form hashed into digests.
    pub fn canonical(&self) -> String {
        self.values.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.values.keys().map(String::as_str)
    }
}

fn normalize_key(k: &str) -> String {
    k.trim().replace('_', "-").to_ascii_lowercase()
}

/// Typed reads from a [`RawConfig`] that accumulate errors instead of
/// stopping at the first one.
pub struct Validator<'a> {
    raw: &'a RawConfig,
    pub errors: Vec<String>,
}

impl<'a> Validator<'a> {
    pub fn new(raw: &'a RawConfig) -> Self {
        Self {
            raw,
            errors: Vec::new(),
        }
    }

    pub fn error(&mut self, msg: impl Into<String>) {
        self.errors.push(msg.into());
    }

    /// Records a library error and returns `None`.
    pub fn check<T, E: Display>(&mut self, r: Result<T, E>) -> Option<T> {
        match r {
            Ok(v) => Some(v),
            Err(e) => {
                self.errors.push(e.to_string());
                None
            }
        }
    }

    pub fn str_or(&self, key: &str, default: &str) -> String {
        self.raw.get(key).unwrap_or(default).to_string()
    }

    pub fn opt_str(&self, key: &str) -> Option<String> {
        self.raw.get(key).map(str::to_string)
    }

    pub fn opt<T: FromStr>(&mut self, key: &str) -> Option<T> {
        let s = self.raw.get(key)?;
        match s.parse() {
            Ok(v) => Some(v),
            Err(_) => {
                self.errors.push(format!("--{key}: cannot parse `{s}`"));
                None
            }
        }
    }

    pub fn or<T: FromStr>(&mut self, key: &str, default: T) -> T {
        self.opt(key).unwrap_or(default)
    }

    /// Comma-separated list; `None` if the key is absent.
    pub fn list<T: FromStr>(&mut self, key: &str) -> Option<Vec<T>> {
        let s = self.raw.get(key)?;
        let mut out = Vec::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            match part.parse() {
                Ok(v) => out.push(v),
                Err(_) => {
                    self.errors.push(format!("--{key}: cannot parse `{part}` in `{s}`"));
                    return None;
                }
            }
        }
        if out.is_empty() {
            self.errors.push(format!("--{key}: empty list"));
            return None;
        }
        Some(out)
    }

    pub fn flag(&mut self, key: &str) -> bool {
        match self.raw.get(key) {
            None => false,
            Some("true" | "1" | "yes" | "") => true,
            Some("false" | "0" | "no") => false,
            Some(other) => {
                self.errors
                    .push(format!("--{key}: expected true or false, got `{other}`"));
                false
            }
        }
    }

    /// `--seed`, then `TIMEROBUST_SEED`, then the default.
    pub fn seed(&mut self) -> u64 {
        if let Some(s) = self.opt::<u64>("seed") {
            return s;
        }
        if self.raw.get("seed").is_some() {
            return DEFAULT_SEED;
        }
        match std::env::var(SEED_ENV) {
            Ok(v) => v.trim().parse().unwrap_or_else(|_| {
                self.errors.push(format!("{SEED_ENV}: cannot parse `{v}` as a seed"));
                DEFAULT_SEED
            }),
            Err(_) => DEFAULT_SEED,
        }
    }

    pub fn reps(&mut self) -> u64 {
        let reps = self.or("reps", DEFAULT_REPS);
        if reps < 2 {
            self.error(format!("--reps must be at least 2, got {reps}"));
        }
        reps
    }

    pub fn workers(&mut self) -> usize {
        let w = self.or("workers", 1usize);
        if w == 0 {
            self.error("--workers must be at least 1");
        }
        w
    }

    /// Means from `--mu-grid` or `--mu`.
    pub fn mu_grid(&mut self, default: Option<f64>) -> Vec<f64> {
        if self.raw.get("mu").is_some() && self.raw.get("mu-grid").is_some() {
            self.error("give either --mu or --mu-grid, not both");
        }
        if self.raw.get("mu-grid").is_some() {
            return self.list::<f64>("mu-grid").unwrap_or_default();
        }
        if self.raw.get("mu").is_some() {
            return self.opt::<f64>("mu").into_iter().collect();
        }
        match default {
            Some(d) => vec![d],
            None => {
                self.error("missing --mu or --mu-grid");
                Vec::new()
            }
        }
    }

    pub fn finish(self) -> Result<(), CliError> {
        if self.errors.is_empty() {
            Ok(())
        } else {
            Err(CliError::Validation(self.errors))
        }
    }
}
