//! Run settings shared by every command: defaults, a flat `key=value`
//! file, and command-line overrides, applied in that order.

use std::fs;
use std::path::Path;

use ctxenc_core::{Directions, EdgeKinds, SliceConfig};
use ctxenc_corpus::{FilterConfig, SplitRatios};
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RunConfig {
    pub depth: usize,
    pub edge_kinds: EdgeKinds,
    pub directions: Directions,
    pub interprocedural: bool,
    pub token_budget: usize,
    pub min_words: usize,
    pub max_words: usize,
    pub max_changes: usize,
    pub train_ratio: f64,
    pub valid_ratio: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        let s = SliceConfig::default();
        let f = FilterConfig::default();
        let r = SplitRatios::default();
        RunConfig {
            depth: s.depth,
            edge_kinds: s.edge_kinds,
            directions: s.directions,
            interprocedural: s.interprocedural,
            token_budget: 512,
            min_words: f.min_words,
            max_words: f.max_words,
            max_changes: f.max_changes,
            train_ratio: r.train,
            valid_ratio: r.valid,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("{origin}: unknown key '{key}'")]
    UnknownKey { origin: String, key: String },
    #[error("{origin}: bad value '{value}' for '{key}'")]
    BadValue {
        origin: String,
        key: String,
        value: String,
    },
    #[error("{origin}: expected key=value, got '{line}'")]
    BadLine { origin: String, line: String },
    #[error("{0}")]
    Invalid(String),
}

fn parse_bool(v: &str) -> Option<bool> {
    match v {
        "true" | "on" | "yes" | "1" => Some(true),
        "false" | "off" | "no" | "0" => Some(false),
        _ => None,
    }
}

impl RunConfig {
    /// Sets one field by name; `-` and `_` are interchangeable in keys.
    pub fn set(&mut self, key: &str, value: &str, origin: &str) -> Result<(), ConfigError> {
        let bad = || ConfigError::BadValue {
            origin: origin.to_string(),
            key: key.to_string(),
            value: value.to_string(),
        };
        let num = || value.parse::<usize>().map_err(|_| bad());
        let ratio = || {
            value
                .parse::<f64>()
                .ok()
                .filter(|r| (0.0..=1.0).contains(r))
                .ok_or_else(bad)
        };
        match key.replace('-', "_").as_str() {
            "depth" => self.depth = num()?,
            "edge_kinds" => self.edge_kinds = value.parse().map_err(|_| bad())?,
            "directions" => self.directions = value.parse().map_err(|_| bad())?,
            "interprocedural" => self.interprocedural = parse_bool(value).ok_or_else(bad)?,
            "token_budget" => self.token_budget = num()?,
            "min_words" => self.min_words = num()?,
            "max_words" => self.max_words = num()?,
            "max_changes" => self.max_changes = num()?,
            "train_ratio" => self.train_ratio = ratio()?,
            "valid_ratio" => self.valid_ratio = ratio()?,
            _ => {
                return Err(ConfigError::UnknownKey {
                    origin: origin.to_string(),
                    key: key.to_string(),
                })
            }
        }
        Ok(())
    }

    /// Blank lines and `#` comments are ignored.
    pub fn apply_file_text(&mut self, text: &str, origin: &str) -> Result<(), ConfigError> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or_default().trim();
            if line.is_empty() {
                continue;
            }
            let at = format!("{origin}:{}", i + 1);
            let (k, v) = line.split_once('=').ok_or_else(|| ConfigError::BadLine {
                origin: at.clone(),
                line: line.to_string(),
            })?;
            self.set(k.trim(), v.trim(), &at)?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<(), ConfigError> {
        let text = fs::read_to_string(path)
            .map_err(|e| ConfigError::Invalid(format!("{}: {e}", path.display())))?;
        self.apply_file_text(&text, &path.display().to_string())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |m: &str| Err(ConfigError::Invalid(m.to_string()));
        if self.depth == 0 {
            return invalid("depth must be at least 1");
        }
        if self.token_budget == 0 {
            return invalid("token-budget must be at least 1");
        }
        if self.min_words > self.max_words {
            return invalid("min-words exceeds max-words");
        }
        if !self.ratios().is_valid() {
            return invalid(
                "train-ratio + valid-ratio must be below 1 with a positive train share",
            );
        }
        Ok(())
    }

    pub fn slice(&self) -> SliceConfig {
        SliceConfig {
            depth: self.depth,
            directions: self.directions,
            edge_kinds: self.edge_kinds,
            interprocedural: self.interprocedural,
        }
    }

    pub fn filter(&self) -> FilterConfig {
        FilterConfig {
            min_words: self.min_words,
            max_words: self.max_words,
            max_changes: self.max_changes,
        }
    }

    pub fn ratios(&self) -> SplitRatios {
        SplitRatios {
            train: self.train_ratio,
            valid: self.valid_ratio,
        }
    }
}
