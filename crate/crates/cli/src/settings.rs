// Copyright 2026 The lambdamem Authors
// SPDX-License-Identifier: Apache-2.0

//! Flag and config-file merging. Every value goes through the key-value
//! store, so a malformed flag and a malformed file line fail the same way.

use std::path::Path;
use std::str::FromStr;

use lambdamem::config::{SimulationConfig, DEFAULT_STEPS_T, DEFAULT_STEPS_Z};
use lambdamem::io::config_file::KvConfig;
use lambdamem::io::physical::{physical_to_dimensionless, Conversion, PhysicalParams};
use lambdamem::kernels::CouplingWeights;
use lambdamem::{DetuningParams, Error, Result};
use serde_json::{json, Value};

/// Keys accepted from files and flags.
pub const KNOWN_KEYS: &[&str] = &[
    "r", "length", "t_write", "t_read", "direction", "strategy", "solver", "grid_t", "grid_z", "format", "t_max",
    "t_min", "points", "r_min", "r_max", "axis", "l_min", "l_max", "weights", "rabi", "detuning",
    "coupling_density", "cell_length", "pulse_duration", "gamma", "wavelength", "beam_area",
];

/// Keys that switch to physical input; geometry alone (for `capacity`) does not.
const PHYSICAL_KEYS: &[&str] = &["rabi", "detuning", "coupling_density", "pulse_duration", "gamma"];

pub struct Settings {
    kv: KvConfig,
}

impl Settings {
    /// File values first, then non-empty flags on top.
    pub fn resolve(config: Option<&Path>, flags: &[(&str, Option<String>)]) -> Result<Self> {
        let mut kv = match config {
            Some(p) => KvConfig::load(p).map_err(|e| match e {
                Error::Io(io) => Error::Config(format!("{}: {io}", p.display())),
                other => other,
            })?,
            None => KvConfig::default(),
        };
        for (k, v) in flags {
            if let Some(v) = v {
                kv.set(k, v.clone());
            }
        }
        if let Some(k) = kv.keys().find(|k| !KNOWN_KEYS.contains(k)) {
            return Err(Error::Config(format!("unknown key `{k}`")));
        }
        Ok(Self { kv })
    }

    pub fn get<V: FromStr>(&self, key: &str) -> Result<Option<V>>
    where
        V::Err: std::fmt::Display,
    {
        self.kv.parse_value(key)
    }

    pub fn or<V: FromStr>(&self, key: &str, default: V) -> Result<V>
    where
        V::Err: std::fmt::Display,
    {
        Ok(self.get(key)?.unwrap_or(default))
    }

    pub fn has(&self, key: &str) -> bool {
        self.kv.get(key).is_some()
    }

    fn weights(&self) -> Result<CouplingWeights> {
        match self.kv.get("weights") {
            None | Some("residue") => Ok(CouplingWeights::Residue),
            Some("linear") => Ok(CouplingWeights::Linear),
            Some(other) => Err(Error::Config(format!("unknown weights `{other}`"))),
        }
    }

    pub fn detuning(&self, r: f64) -> Result<DetuningParams<f64>> {
        DetuningParams::with_weights(r, self.weights()?)
    }

    /// Physical parameters, when any physical key is present.
    pub fn physical(&self) -> Result<Option<(PhysicalParams, Conversion)>> {
        if !PHYSICAL_KEYS.iter().any(|k| self.has(k)) {
            return Ok(None);
        }
        if ["t_write", "length", "r"].iter().any(|k| self.has(k)) {
            return Err(Error::Config("give either physical parameters or t_write/length/r, not both".into()));
        }
        let need = |k: &str| -> Result<f64> {
            self.get::<f64>(k)?.ok_or_else(|| Error::Config(format!("physical parameters need `{k}`")))
        };
        let p = PhysicalParams {
            rabi: need("rabi")?,
            detuning: self.or("detuning", 0.0)?,
            coupling_density: need("coupling_density")?,
            length: need("cell_length")?,
            pulse_duration: need("pulse_duration")?,
            gamma: need("gamma")?,
            wavelength: need("wavelength")?,
            beam_area: need("beam_area")?,
        };
        let c = physical_to_dimensionless(&p)?;
        Ok(Some((p, c)))
    }

    /// `(t_write, length, r)` from the dimensionless keys or the physical ones.
    pub fn problem(&self) -> Result<(f64, f64, f64)> {
        if let Some((_, c)) = self.physical()? {
            return Ok((c.t_write, c.length, c.r));
        }
        Ok((self.or("t_write", 5.5)?, self.or("length", 10.0)?, self.or("r", 0.0)?))
    }

    pub fn grid(&self, default_t: usize, default_z: usize) -> Result<(usize, usize)> {
        Ok((self.or("grid_t", default_t)?, self.or("grid_z", default_z)?))
    }

    pub fn sim_config(&self) -> Result<SimulationConfig<f64>> {
        let (t_write, length, r) = self.problem()?;
        let (nt, nz) = self.grid(DEFAULT_STEPS_T, DEFAULT_STEPS_Z)?;
        let t_read = self.or("t_read", 2.0 * t_write)?;
        Ok(SimulationConfig::new(t_write, length, r)?
            .with_detuning(self.detuning(r)?)?
            .with_t_read(t_read)?
            .with_grid(nt, nz)?
            .with_strategy(self.or("strategy", lambdamem::KernelStrategy::Auto)?))
    }
}

pub fn config_json(c: &SimulationConfig<f64>) -> Value {
    json!({
        "t_write": c.t_write,
        "t_read": c.t_read,
        "length": c.length,
        "r": c.detuning.r(),
        "mu": c.detuning.mu(),
        "nu": c.detuning.nu(),
        "steps_t": c.steps_t,
        "steps_z": c.steps_z,
        "strategy": c.strategy.as_str(),
    })
}
