// Copyright 2026 The lambdamem Authors
// SPDX-License-Identifier: Apache-2.0

//! Deterministic CSV/JSON artifacts.
//!
//! CSV floats carry 17 significant digits (`{:.16e}`), use `.` as decimal
//! separator and `\n` line endings. JSON objects are emitted with sorted keys.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde_json::Value;

use crate::error::{Error, Result};

/// Round-trip-exact float formatting.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// A header plus numeric rows.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new<S: AsRef<str>>(header: &[S]) -> Self {
        Self { header: header.iter().map(|h| h.as_ref().to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| fmt_float(*v)).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }

    pub fn parse_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Config("empty CSV".into()))?
            .split(',')
            .map(str::to_string)
            .collect::<Vec<_>>();
        let mut rows = Vec::new();
        for (n, line) in lines.enumerate() {
            let row = line
                .split(',')
                .map(|c| c.parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::Config(format!("CSV row {}: {e}", n + 2)))?;
            if row.len() != header.len() {
                return Err(Error::Config(format!("CSV row {} has {} cells", n + 2, row.len())));
            }
            rows.push(row);
        }
        Ok(Self { header, rows })
    }
}

/// Pretty JSON with sorted keys and a trailing newline.
pub fn to_json_string(value: &Value) -> Result<String> {
    // serde_json's default map is ordered by key
    let sorted: Value = serde_json::from_str(&serde_json::to_string(value)?)?;
    Ok(serde_json::to_string_pretty(&sorted)? + "\n")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    Csv,
    Json,
    #[default]
    Both,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            "both" => Ok(Format::Both),
            _ => Err(Error::Config(format!("unknown format `{s}`"))),
        }
    }
}

/// Anything that can be written as a table and/or a JSON document.
pub trait Artifact {
    fn table(&self) -> Table;
    fn json(&self) -> Value;
}

/// Writes `<stem>.csv` and/or `<stem>.json` into `dir`; returns the paths.
pub fn emit<A: Artifact + ?Sized>(artifact: &A, format: Format, dir: &Path, stem: &str) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    if matches!(format, Format::Csv | Format::Both) {
        let p = dir.join(format!("{stem}.csv"));
        std::fs::write(&p, artifact.table().to_csv())?;
        written.push(p);
    }
    if matches!(format, Format::Json | Format::Both) {
        let p = dir.join(format!("{stem}.json"));
        std::fs::write(&p, to_json_string(&artifact.json())?)?;
        written.push(p);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn empty_table_is_header_only() {
        let t = Table::new(&["t", "x"]);
        assert_eq!(t.to_csv(), "t,x\n");
        assert_eq!(Table::parse_csv("t,x\n").unwrap(), t);
    }

    #[test]
    fn json_keys_are_sorted() {
        let v = serde_json::json!({"zeta": 1, "alpha": {"b": 2, "a": 1}});
        let s = to_json_string(&v).unwrap();
        assert!(s.find("alpha").unwrap() < s.find("zeta").unwrap());
        assert!(s.find("\"a\"").unwrap() < s.find("\"b\"").unwrap());
        assert!(s.ends_with('\n'));
    }

    #[test]
    fn format_parsing() {
        assert_eq!("csv".parse::<Format>().unwrap(), Format::Csv);
        assert!("xml".parse::<Format>().is_err());
    }

    proptest! {
        #[test]
        fn csv_round_trip_is_lossless(rows in prop::collection::vec(prop::collection::vec(-1e300f64..1e300, 3), 0..20)) {
            let mut t = Table::new(&["a", "b", "c"]);
            for r in &rows {
                t.push(r.clone());
            }
            let back = Table::parse_csv(&t.to_csv()).unwrap();
            prop_assert_eq!(back, t);
        }

        #[test]
        fn tiny_and_subnormal_floats_round_trip(x in prop::num::f64::NORMAL | prop::num::f64::SUBNORMAL | prop::num::f64::ZERO) {
            prop_assert_eq!(fmt_float(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
        }
    }
}
