// Copyright 2026 The lambdamem Authors
// SPDX-License-Identifier: Apache-2.0

//! Flat `key = value` configuration files.
//!
//! `#` starts a comment, blank lines are ignored and `-` in keys is read as
//! `_`, so `t-write` and `t_write` name the same entry. A repeated key is an
//! error.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct KvConfig {
    entries: BTreeMap<String, String>,
}

fn normalize(key: &str) -> String {
    key.trim().replace('-', "_")
}

impl KvConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", n + 1)))?;
            let key = normalize(k);
            let value = v.trim();
            if key.is_empty() || value.is_empty() {
                return Err(Error::Config(format!("line {}: empty key or value", n + 1)));
            }
            if entries.insert(key.clone(), value.to_string()).is_some() {
                return Err(Error::Config(format!("line {}: duplicate key `{key}`", n + 1)));
            }
        }
        Ok(Self { entries })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(&normalize(key)).map(String::as_str)
    }

    /// Parsed value of `key`, if present.
    pub fn parse_value<V: FromStr>(&self, key: &str) -> Result<Option<V>>
    where
        V::Err: std::fmt::Display,
    {
        match self.get(key) {
            None => Ok(None),
            Some(s) => s
                .parse()
                .map(Some)
                .map_err(|e| Error::Config(format!("`{}`: cannot parse `{s}`: {e}", normalize(key)))),
        }
    }

    /// Sets `key`, replacing a file value (flags override files).
    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.entries.insert(normalize(key), value.into());
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn comments_blanks_and_dashes() {
        let c = KvConfig::parse("# header\n\nt-write = 5.5  # trailing\nlength=10\n").unwrap();
        assert_eq!(c.get("t_write"), Some("5.5"));
        assert_eq!(c.parse_value::<f64>("length").unwrap(), Some(10.0));
        assert_eq!(c.parse_value::<f64>("r").unwrap(), None);
    }

    #[test]
    fn malformed_lines_are_rejected() {
        assert!(KvConfig::parse("just words\n").is_err());
        assert!(KvConfig::parse("a = \n").is_err());
        assert!(KvConfig::parse("a = 1\na = 2\n").is_err());
        let c = KvConfig::parse("r = fast\n").unwrap();
        assert!(c.parse_value::<f64>("r").is_err());
    }

    #[test]
    fn set_overrides() {
        let mut c = KvConfig::parse("r = 1\n").unwrap();
        c.set("r", "0.5");
        assert_eq!(c.get("r"), Some("0.5"));
    }
}
