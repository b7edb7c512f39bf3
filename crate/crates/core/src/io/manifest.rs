// Copyright 2026 The lambdamem Authors
// SPDX-License-Identifier: Apache-2.0

//! Run manifests: what was run, on which grid, and hashes of what it wrote.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use super::emit::to_json_string;
use crate::error::Result;

/// Hex SHA-256 of a file's bytes.
pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path)?;
    Ok(Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect())
}

/// Contains no timestamps or absolute paths, so identical runs give identical manifests.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config: Value,
    pub physical: Option<Value>,
    pub steps_t: usize,
    pub steps_z: usize,
    pub strategy: String,
    pub version: String,
    /// File name to SHA-256.
    pub outputs: BTreeMap<String, String>,
}

impl RunManifest {
    pub fn new(command: &str, config: Value, steps_t: usize, steps_z: usize, strategy: &str) -> Self {
        Self {
            command: command.to_string(),
            config,
            physical: None,
            steps_t,
            steps_z,
            strategy: strategy.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            outputs: BTreeMap::new(),
        }
    }

    /// Hashes each written file under its file name.
    pub fn record(&mut self, paths: &[PathBuf]) -> Result<()> {
        for p in paths {
            let name = p.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            self.outputs.insert(name, sha256_file(p)?);
        }
        Ok(())
    }

    /// Writes `manifest.json` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        let p = dir.join("manifest.json");
        std::fs::write(&p, to_json_string(&serde_json::to_value(self)?)?)?;
        Ok(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_digest() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("abc.txt");
        std::fs::write(&p, "abc").unwrap();
        assert_eq!(
            sha256_file(&p).unwrap(),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn manifests_are_reproducible() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.csv");
        std::fs::write(&p, "t\n1\n").unwrap();
        let make = || {
            let mut m = RunManifest::new("write", serde_json::json!({"r": 0.0}), 8, 4, "auto");
            m.record(std::slice::from_ref(&p)).unwrap();
            std::fs::read(m.write(dir.path()).unwrap()).unwrap()
        };
        assert_eq!(make(), make());
    }
}
