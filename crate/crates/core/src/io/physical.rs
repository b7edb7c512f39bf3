// Copyright 2026 The lambdamem Authors
// SPDX-License-Identifier: Apache-2.0

//! Physical units to the dimensionless problem, with validity diagnostics.

use serde::Serialize;

use crate::config::SimulationConfig;
use crate::error::{check_non_negative, check_positive, Result};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// `a >> b` is read as `a >= MUCH_GREATER * b`.
pub const MUCH_GREATER: f64 = 10.0;

/// Physical description of one memory cell and pulse.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhysicalParams {
    /// Rabi frequency of the driving field, rad/s.
    pub rabi: f64,
    /// One-photon detuning, rad/s (zero on resonance).
    pub detuning: f64,
    /// `g sqrt(N)`, s^-1 m^-1/2.
    pub coupling_density: f64,
    /// Medium length, m.
    pub length: f64,
    /// Write pulse duration, s.
    pub pulse_duration: f64,
    /// Excited-state decay rate, s^-1.
    pub gamma: f64,
    /// Signal wavelength, m.
    pub wavelength: f64,
    /// Beam cross-section, m^2.
    pub beam_area: f64,
}

impl PhysicalParams {
    pub fn validate(&self) -> Result<()> {
        check_positive("rabi", self.rabi)?;
        check_non_negative("detuning", self.detuning)?;
        check_positive("coupling_density", self.coupling_density)?;
        check_positive("length", self.length)?;
        check_positive("pulse_duration", self.pulse_duration)?;
        check_positive("gamma", self.gamma)?;
        check_positive("wavelength", self.wavelength)?;
        check_positive("beam_area", self.beam_area)?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ValidityWarning {
    /// Rabi frequency not much larger than the decay rate.
    RabiNotAboveDecay,
    /// Pulse not much shorter than the excited-state lifetime.
    PulseNotShorterThanLifetime,
    /// Transit time `L/c` not much shorter than the pulse.
    TransitNotShorterThanPulse,
}

/// Dimensionless parameters and diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Conversion {
    pub t_write: f64,
    pub length: f64,
    pub r: f64,
    /// Effective interaction coefficient `p = g sqrt(N) / Omega`.
    pub p: f64,
    /// Optical depth from `T d gamma = T_W L / 2`.
    pub optical_depth: f64,
    /// `T gamma`.
    pub t_gamma: f64,
    pub warnings: Vec<ValidityWarning>,
    #[serde(skip)]
    source: PhysicalParams,
}

/// `T = Omega T`, `L = 2 g^2 N L / Omega`, `r = Delta / (2 Omega)`, `p = g sqrt(N) / Omega`.
pub fn physical_to_dimensionless(params: &PhysicalParams) -> Result<Conversion> {
    params.validate()?;
    let om = params.rabi;
    let t_write = om * params.pulse_duration;
    let g2n = params.coupling_density * params.coupling_density;
    let length = 2.0 * g2n * params.length / om;
    let t_gamma = params.pulse_duration * params.gamma;
    let optical_depth = t_write * length / (2.0 * t_gamma);
    let mut warnings = Vec::new();
    if om < MUCH_GREATER * params.gamma {
        warnings.push(ValidityWarning::RabiNotAboveDecay);
    }
    if MUCH_GREATER * t_gamma > 1.0 {
        warnings.push(ValidityWarning::PulseNotShorterThanLifetime);
    }
    if MUCH_GREATER * params.length / SPEED_OF_LIGHT > params.pulse_duration {
        warnings.push(ValidityWarning::TransitNotShorterThanPulse);
    }
    Ok(Conversion {
        t_write,
        length,
        r: params.detuning / (2.0 * om),
        p: params.coupling_density / om,
        optical_depth,
        t_gamma,
        warnings,
        source: *params,
    })
}

impl Conversion {
    /// Inverts the scalings given the Rabi frequency.
    pub fn back_substitute(&self, rabi: f64) -> PhysicalParams {
        let coupling_density = self.p * rabi;
        PhysicalParams {
            rabi,
            detuning: 2.0 * self.r * rabi,
            coupling_density,
            length: self.length * rabi / (2.0 * coupling_density * coupling_density),
            pulse_duration: self.t_write / rabi,
            gamma: self.source.gamma,
            wavelength: self.source.wavelength,
            beam_area: self.source.beam_area,
        }
    }

    /// Simulation setup with default resolution and `t_read = 2 t_write`.
    pub fn to_config(&self) -> Result<SimulationConfig<f64>> {
        SimulationConfig::new(self.t_write, self.length, self.r)
    }
}

/// `d` solved from `T d gamma = T_W L / 2`.
pub fn optical_depth(t_write: f64, length: f64, t_gamma: f64) -> Result<f64> {
    check_positive("T gamma", t_gamma)?;
    Ok(t_write * length / (2.0 * t_gamma))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sample() -> PhysicalParams {
        PhysicalParams {
            rabi: 2.0e9,
            detuning: 1.0e9,
            coupling_density: 3.0e6,
            length: 0.01,
            pulse_duration: 1.5e-9,
            gamma: 3.0e7,
            wavelength: 795e-9,
            beam_area: 1e-6,
        }
    }

    #[test]
    fn scalings() {
        let c = physical_to_dimensionless(&sample()).unwrap();
        assert!((c.t_write - 3.0).abs() < 1e-12);
        assert!((c.r - 0.25).abs() < 1e-15);
        assert!((c.length - 2.0 * 9.0e12 * 0.01 / 2.0e9).abs() < 1e-12);
        assert!((c.p - 1.5e-3).abs() < 1e-18);
        assert!(c.warnings.is_empty(), "{:?}", c.warnings);
    }

    #[test]
    fn optical_depth_identity() {
        // T_W L / 2 = 15.7 for (pi, 10)
        let prod = std::f64::consts::PI * 10.0 / 2.0;
        assert!((prod - 15.7).abs() < 0.01);
        assert!((optical_depth(std::f64::consts::PI, 10.0, 1.0).unwrap() - prod).abs() < 1e-12);
        // T_W L / 2 = 30 with d = 2400 gives T gamma = 0.0125
        let t_gamma = 30.0 / 2400.0;
        assert_eq!(t_gamma, 0.0125);
        assert!((optical_depth(6.0, 10.0, t_gamma).unwrap() - 2400.0).abs() < 1e-9);
        assert!(MUCH_GREATER * t_gamma <= 1.0);
    }

    #[test]
    fn weak_drive_warns() {
        let mut p = sample();
        p.rabi = p.gamma;
        let c = physical_to_dimensionless(&p).unwrap();
        assert!(c.warnings.contains(&ValidityWarning::RabiNotAboveDecay));
        let mut p = sample();
        p.length = 10.0;
        let c = physical_to_dimensionless(&p).unwrap();
        assert!(c.warnings.contains(&ValidityWarning::TransitNotShorterThanPulse));
    }

    #[test]
    fn invalid_inputs() {
        let mut p = sample();
        p.beam_area = 0.0;
        assert!(physical_to_dimensionless(&p).is_err());
        let mut p = sample();
        p.detuning = -1.0;
        assert!(physical_to_dimensionless(&p).is_err());
    }

    proptest! {
        #[test]
        fn back_substitution_round_trips(
            rabi in 1e6f64..1e11, det in 0.0f64..1e10, g in 1e3f64..1e8, l in 1e-4f64..1.0,
            t in 1e-10f64..1e-6, gamma in 1e5f64..1e8,
        ) {
            let p = PhysicalParams { rabi, detuning: det, coupling_density: g, length: l, pulse_duration: t, gamma, wavelength: 1e-6, beam_area: 1e-6 };
            let back = physical_to_dimensionless(&p).unwrap().back_substitute(rabi);
            let rel = |a: f64, b: f64| if b == 0.0 { a.abs() } else { ((a - b) / b).abs() };
            prop_assert!(rel(back.detuning, det) < 1e-12);
            prop_assert!(rel(back.coupling_density, g) < 1e-12);
            prop_assert!(rel(back.length, l) < 1e-12);
            prop_assert!(rel(back.pulse_duration, t) < 1e-12);
        }
    }
}
