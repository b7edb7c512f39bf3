// Copyright 2026 The lambdamem Authors
// SPDX-License-Identifier: Apache-2.0

//! Dimensionless problem definition shared by writing and read-out.

use crate::error::{check_positive, Error, Result};
use crate::kernels::{DetuningParams, KernelStrategy};
use crate::scalar::Real;
use crate::special_math::QuadratureGrid;

/// Largest detuning accepted by the simulation entry points.
pub const MAX_DETUNING: f64 = 3.5;
/// Time steps per `max(t_write, t_read)`.
pub const DEFAULT_STEPS_T: usize = 2048;
/// Cells per medium length.
pub const DEFAULT_STEPS_Z: usize = 1024;

/// Durations, medium length, detuning and resolution of one write/read cycle.
///
/// The write and read stages get their own time grids with a common target
/// step `max(t_write, t_read) / steps_t`, each rounded up to an integer
/// number of intervals that spans the stage exactly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulationConfig<T: Real> {
    pub t_write: T,
    pub t_read: T,
    pub length: T,
    pub detuning: DetuningParams<T>,
    pub steps_t: usize,
    pub steps_z: usize,
    pub strategy: KernelStrategy,
}

impl<T: Real> SimulationConfig<T> {
    /// Default resolution, `t_read = 2 t_write`, automatic kernel strategy.
    pub fn new(t_write: T, length: T, r: T) -> Result<Self> {
        let cfg = Self {
            t_write,
            t_read: t_write + t_write,
            length,
            detuning: DetuningParams::new(r)?,
            steps_t: DEFAULT_STEPS_T,
            steps_z: DEFAULT_STEPS_Z,
            strategy: KernelStrategy::Auto,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_t_read(mut self, t_read: T) -> Result<Self> {
        self.t_read = t_read;
        self.validate()?;
        Ok(self)
    }

    pub fn with_grid(mut self, steps_t: usize, steps_z: usize) -> Result<Self> {
        self.steps_t = steps_t;
        self.steps_z = steps_z;
        self.validate()?;
        Ok(self)
    }

    pub fn with_strategy(mut self, strategy: KernelStrategy) -> Self {
        self.strategy = strategy;
        self
    }

    pub fn with_detuning(mut self, detuning: DetuningParams<T>) -> Result<Self> {
        self.detuning = detuning;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        check_positive("t_write", self.t_write.to_f64_lossy())?;
        check_positive("t_read", self.t_read.to_f64_lossy())?;
        check_positive("length", self.length.to_f64_lossy())?;
        let r = self.detuning.r().to_f64_lossy();
        if !(0.0..=MAX_DETUNING).contains(&r) {
            return Err(Error::DetuningRange { r, max: MAX_DETUNING });
        }
        if self.steps_t < 2 || self.steps_z < 2 {
            return Err(Error::Config(format!(
                "grid needs at least 2 intervals per axis, got {}x{}",
                self.steps_t, self.steps_z
            )));
        }
        Ok(())
    }

    fn target_step(&self) -> T {
        self.t_write.max(self.t_read) / T::from_count(self.steps_t)
    }

    fn stage_grid(&self, duration: T) -> Result<QuadratureGrid<T>> {
        let ratio = (duration / self.target_step()).to_f64_lossy();
        let intervals = ((ratio - 1e-9).ceil() as usize).max(2);
        Ok(QuadratureGrid::spanning(T::zero(), duration, intervals)?)
    }

    pub fn write_grid(&self) -> Result<QuadratureGrid<T>> {
        self.stage_grid(self.t_write)
    }

    pub fn read_grid(&self) -> Result<QuadratureGrid<T>> {
        self.stage_grid(self.t_read)
    }

    pub fn grid_z(&self) -> Result<QuadratureGrid<T>> {
        Ok(QuadratureGrid::spanning(T::zero(), self.length, self.steps_z)?)
    }

    /// Same problem at twice the resolution on both axes.
    pub fn refined(&self) -> Self {
        Self {
            steps_t: self.steps_t * 2,
            steps_z: self.steps_z * 2,
            ..*self
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stage_grids_share_the_target_step() {
        let cfg = SimulationConfig::new(5.5_f64, 10.0, 0.0).unwrap();
        let w = cfg.write_grid().unwrap();
        let r = cfg.read_grid().unwrap();
        assert_eq!(r.intervals(), 2048);
        assert_eq!(w.intervals(), 1024);
        assert_eq!(w.end(), 5.5);
        let odd = cfg.with_t_read(10.0).unwrap();
        let w = odd.write_grid().unwrap();
        assert!((w.end() - 5.5).abs() < 1e-12);
        assert!(w.step() <= 10.0 / 2048.0 + 1e-15);
        assert_eq!(cfg.grid_z().unwrap().count(), 1025);
    }

    #[test]
    fn validation() {
        assert!(SimulationConfig::new(0.0_f64, 10.0, 0.0).is_err());
        assert!(SimulationConfig::new(1.0_f64, -1.0, 0.0).is_err());
        assert!(matches!(
            SimulationConfig::new(1.0_f64, 1.0, 3.6),
            Err(Error::DetuningRange { .. })
        ));
        assert!(SimulationConfig::new(1.0_f64, 1.0, -0.5).is_err());
        let cfg = SimulationConfig::new(1.0_f64, 1.0, 0.5).unwrap();
        assert!(cfg.with_grid(1, 10).is_err());
        assert_eq!(cfg.refined().steps_z, 2048);
    }
}
