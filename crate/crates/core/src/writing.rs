// Copyright 2026 The lambdamem Authors
// SPDX-License-Identifier: Apache-2.0

//! Write stage: field and coherence from the kernels, entrance closed form and
//! photon bookkeeping.

use num_complex::Complex;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::SimulationConfig;
use crate::dynamics::{global_balance, input_energy, integrate_raman, integrate_write, FieldHistory, Recording, StorageState};
use crate::error::{Error, Result};
use crate::io::emit::{Artifact, Table};
use crate::kernels::convolution::Convolver;
use crate::kernels::{time_factor, DetuningParams, KernelCache, KernelField, KernelName, TimeFactor};
use crate::scalar::Real;
use crate::special_math::QuadratureGrid;

/// Which solver produces the fields.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Solver {
    /// Convolution with the Green's-function kernels.
    #[default]
    Kernel,
    /// Direct time marching.
    Oracle,
    /// Adiabatic Raman limit (time marching, `r > 0`).
    Raman,
}

impl Solver {
    pub fn as_str(&self) -> &'static str {
        match self {
            Solver::Kernel => "kernel",
            Solver::Oracle => "oracle",
            Solver::Raman => "raman",
        }
    }
}

impl std::str::FromStr for Solver {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "kernel" => Ok(Solver::Kernel),
            "oracle" => Ok(Solver::Oracle),
            "raman" => Ok(Solver::Raman),
            _ => Err(Error::Config(format!("unknown solver `{s}`"))),
        }
    }
}

/// Photon bookkeeping of one write, in percent of the input energy.
///
/// `balance_residual` is the relative (not percent) mismatch
/// `|E_in - E_out - stored_b - stored_c| / E_in`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EfficiencyReport {
    pub leakage: f64,
    pub n_eff: f64,
    pub n_eff_paper: f64,
    pub excited_loss: f64,
    pub total_losses: f64,
    pub balance_residual: f64,
}

impl Artifact for EfficiencyReport {
    fn table(&self) -> Table {
        let mut t = Table::new(&["leakage", "n_eff", "n_eff_paper", "excited_loss", "total_losses", "balance_residual"]);
        t.push(vec![
            self.leakage,
            self.n_eff,
            self.n_eff_paper,
            self.excited_loss,
            self.total_losses,
            self.balance_residual,
        ]);
        t
    }

    fn json(&self) -> serde_json::Value {
        serde_json::to_value(self).unwrap_or_default()
    }
}

/// Output of a write stage.
#[derive(Debug, Clone)]
pub struct WriteResult<T: Real> {
    pub field: FieldHistory<T>,
    pub stored: StorageState<T>,
    pub report: EfficiencyReport,
    pub input_energy: T,
    pub solver: Solver,
}

/// Options for [`simulate_write_with`].
#[derive(Debug, Clone, Copy, Default)]
pub struct WriteOptions<'a, T: Real> {
    pub solver: Solver,
    pub recording: Recording,
    pub cache: Option<&'a KernelCache<T>>,
}

/// Normalized entrance coherence `b(t, 0) = (1 - F1(t)) / 2`, so `B(t, 0) = -2 b(t, 0)`.
pub fn coherence_at_entrance<T: Real>(t: T, params: &DetuningParams<T>) -> Complex<T> {
    let one = Complex::new(T::one(), T::zero());
    (one - time_factor(TimeFactor::F1, t, params)).scale(T::lit(0.5))
}

/// Kernel-path write with the full field recorded.
pub fn simulate_write<T, F>(config: &SimulationConfig<T>, input: F) -> Result<WriteResult<T>>
where
    T: Real,
    F: Fn(T) -> Complex<T> + Sync,
{
    simulate_write_with(config, input, WriteOptions { recording: Recording::Field, ..Default::default() })
}

pub fn simulate_write_with<T, F>(config: &SimulationConfig<T>, input: F, options: WriteOptions<'_, T>) -> Result<WriteResult<T>>
where
    T: Real,
    F: Fn(T) -> Complex<T> + Sync,
{
    config.validate()?;
    let grid_t = config.write_grid()?;
    let e_in = input_energy(&grid_t, &input);
    if !(e_in > T::zero()) {
        return Err(Error::ZeroInputEnergy);
    }
    let (field, stored) = match options.solver {
        Solver::Oracle => integrate_write(config, &input, options.recording)?,
        Solver::Raman => integrate_raman(config, &input, options.recording)?,
        Solver::Kernel => kernel_write(config, &grid_t, &input, options)?,
    };
    let report = report(&field, &stored, e_in)?;
    Ok(WriteResult { field, stored, report, input_energy: e_in, solver: options.solver })
}

fn report<T: Real>(field: &FieldHistory<T>, stored: &StorageState<T>, e_in: T) -> Result<EfficiencyReport> {
    let bal = global_balance(field, stored, e_in)?;
    let n_eff = 100.0 * bal.stored_b.to_f64_lossy();
    Ok(EfficiencyReport {
        leakage: 100.0 * bal.transmitted.to_f64_lossy(),
        n_eff,
        n_eff_paper: n_eff / 4.0,
        excited_loss: 100.0 * bal.stored_c.to_f64_lossy(),
        total_losses: 100.0 - n_eff,
        balance_residual: bal.residual.to_f64_lossy(),
    })
}

fn kernel_write<T, F>(
    config: &SimulationConfig<T>,
    grid_t: &QuadratureGrid<T>,
    input: &F,
    options: WriteOptions<'_, T>,
) -> Result<(FieldHistory<T>, StorageState<T>)>
where
    T: Real,
    F: Fn(T) -> Complex<T> + Sync,
{
    let grid_z = config.grid_z()?;
    let p = &config.detuning;
    let get = |name| -> Result<std::sync::Arc<KernelField<T>>> {
        match options.cache {
            Some(c) => c.get_or_build(name, grid_t, &grid_z, p, config.strategy),
            None => crate::kernels::build_kernel(name, grid_t, &grid_z, p, config.strategy).map(std::sync::Arc::new),
        }
    };
    let gab = get(KernelName::Ab)?;
    let gac = get(KernelName::Ac)?;
    let gaa = get(KernelName::Aa)?;
    let a_in: Vec<Complex<T>> = grid_t.points().map(input).collect();
    let nt = grid_t.count();
    let nz = grid_z.count();
    let h = grid_t.step();
    let full = options.recording != Recording::Output;
    let bc_full = options.recording == Recording::Full;

    struct Col<T> {
        a: Vec<Complex<T>>,
        b: Vec<Complex<T>>,
        c: Vec<Complex<T>>,
    }
    let cols: Vec<Col<T>> = (0..nz)
        .into_par_iter()
        .map_init(
            || Convolver::new(nt, h),
            |conv, iz| {
                let needs_a = full || iz == nz - 1;
                let mut a = Vec::new();
                if needs_a {
                    a = vec![Complex::new(T::zero(), T::zero()); nt];
                    conv.convolve(&a_in, gaa.column(iz), &mut a);
                    for k in 0..nt {
                        a[k] = a[k] + a_in[k] * gaa.delta_t_weight();
                    }
                }
                let (b, c) = if bc_full {
                    let mut b = vec![Complex::new(T::zero(), T::zero()); nt];
                    let mut c = b.clone();
                    conv.convolve(&a_in, gab.column(iz), &mut b);
                    conv.convolve(&a_in, gac.column(iz), &mut c);
                    b.iter_mut().for_each(|v| *v = -*v);
                    (b, c)
                } else {
                    (
                        vec![-end_convolution(&a_in, gab.column(iz), h)],
                        vec![end_convolution(&a_in, gac.column(iz), h)],
                    )
                };
                Col { a, b, c }
            },
        )
        .collect();

    let recording = options.recording;
    let mut history = FieldHistory::new(*grid_t, grid_z, recording);
    for (iz, col) in cols.iter().enumerate() {
        if iz == nz - 1 {
            history.output.copy_from_slice(&col.a);
        }
        if let Some(v) = &mut history.a {
            for it in 0..nt {
                v[it * nz + iz] = col.a[it];
            }
        }
        if let (Some(vb), Some(vc)) = (&mut history.b, &mut history.c) {
            for it in 0..nt {
                vb[it * nz + iz] = col.b[it];
                vc[it * nz + iz] = col.c[it];
            }
        }
    }
    let stored = StorageState {
        grid_z,
        b: cols.iter().map(|c| *c.b.last().expect("nonempty")).collect(),
        c: cols.iter().map(|c| *c.c.last().expect("nonempty")).collect(),
        t: grid_t.end(),
    };
    Ok((history, stored))
}

/// Last sample of the trapezoid convolution `int_0^T x(T - s) y(s) ds`.
fn end_convolution<T: Real>(x: &[Complex<T>], y: &[Complex<T>], h: T) -> Complex<T> {
    let n = x.len();
    let mut acc = Complex::new(T::zero(), T::zero());
    for j in 0..n {
        acc = acc + x[n - 1 - j] * y[j];
    }
    acc = acc - (x[n - 1] * y[0] + x[0] * y[n - 1]).scale(T::lit(0.5));
    acc.scale(h)
}

/// Leakage `100 int |A(t, L)|^2 dt / E_in`.
pub fn leakage<T: Real>(result: &WriteResult<T>) -> Result<f64> {
    Ok(report(&result.field, &result.stored, result.input_energy)?.leakage)
}

/// Stored fraction `100 (1/2) int |B(T, z)|^2 dz / E_in`.
pub fn n_eff<T: Real>(result: &WriteResult<T>) -> Result<f64> {
    Ok(report(&result.field, &result.stored, result.input_energy)?.n_eff)
}

/// `100 - n_eff`.
pub fn total_losses<T: Real>(result: &WriteResult<T>) -> Result<f64> {
    Ok(report(&result.field, &result.stored, result.input_energy)?.total_losses)
}

/// Storage profile `(z, |b|^2)` with `b = -B/2`.
pub fn storage_profile<T: Real>(stored: &StorageState<T>) -> Table {
    let mut t = Table::new(&["z", "abs_b_sq"]);
    for (iz, b) in stored.b.iter().enumerate() {
        t.push(vec![stored.grid_z.point(iz).to_f64_lossy(), b.norm_sqr().to_f64_lossy() / 4.0]);
    }
    t
}

/// Entrance coherence curve `(t, |b(t, 0)|^2)` on `[0, t_max]`.
pub fn entrance_curve<T: Real>(params: &DetuningParams<T>, t_max: T, intervals: usize) -> Result<Table> {
    let grid = QuadratureGrid::spanning(T::zero(), t_max, intervals)?;
    let mut t = Table::new(&["t", "abs_b_sq"]);
    for x in grid.points() {
        t.push(vec![x.to_f64_lossy(), coherence_at_entrance(x, params).norm_sqr().to_f64_lossy()]);
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::unit_input;
    use std::f64::consts::PI;

    fn p(r: f64) -> DetuningParams<f64> {
        DetuningParams::new(r).unwrap()
    }

    #[test]
    fn entrance_examples() {
        for r in [0.0, 0.5, 2.0] {
            assert_eq!(coherence_at_entrance(0.0, &p(r)).norm(), 0.0);
        }
        assert!((coherence_at_entrance(PI, &p(0.0)) - Complex::new(1.0, 0.0)).norm() < 1e-15);
        let t = 2.0 * PI * 10.0;
        let v = coherence_at_entrance(t, &p(10.0)).norm_sqr();
        assert!((v - (t / 40.0).sin().powi(2)).abs() < 1e-2, "{v}");
    }

    #[test]
    fn entrance_limits() {
        let mut t = 0.0;
        while t < 25.0 {
            let v = coherence_at_entrance(t, &p(0.0)).norm_sqr();
            assert!((v - (t / 2.0).sin().powi(4)).abs() < 1e-14);
            let big = coherence_at_entrance(t * 10.0, &p(10.0)).norm_sqr();
            assert!((big - (t * 10.0 / 40.0).sin().powi(2)).abs() < 0.02);
            assert!(big <= 1.0 + 1e-12);
            t += 0.01;
        }
    }

    #[test]
    fn kernel_write_matches_entrance_closed_form() {
        for r in [0.0, 0.1, 0.5, 1.0, 2.0] {
            let cfg = SimulationConfig::new(5.0, 4.0, r).unwrap().with_grid(16384, 2).unwrap();
            let res = simulate_write_with(
                &cfg,
                unit_input,
                WriteOptions { recording: Recording::Full, ..Default::default() },
            )
            .unwrap();
            let b = res.field.b_column(0).unwrap();
            for (it, t) in res.field.grid_t().points().enumerate() {
                let want = coherence_at_entrance(t, &p(r)).scale(-2.0);
                assert!((b[it] - want).norm() < 1e-6, "r = {r}, t = {t}: {}", (b[it] - want).norm());
            }
        }
    }

    #[test]
    fn kernel_and_oracle_paths_agree() {
        for r in [0.0, 0.5, 1.0] {
            let cfg = SimulationConfig::new(4.0, 10.0, r).unwrap().with_grid(1024, 512).unwrap();
            let k = simulate_write_with(&cfg, unit_input, WriteOptions::default()).unwrap().report;
            let o = simulate_write_with(&cfg, unit_input, WriteOptions { solver: Solver::Oracle, ..Default::default() })
                .unwrap()
                .report;
            assert!((k.leakage - o.leakage).abs() < 0.2, "{k:?} {o:?}");
            assert!((k.n_eff - o.n_eff).abs() < 0.2, "{k:?} {o:?}");
            assert!((k.total_losses - o.total_losses).abs() < 0.2);
        }
    }

    #[test]
    fn report_bookkeeping() {
        let cfg = SimulationConfig::new(5.5, 10.0, 0.0).unwrap().with_grid(1024, 512).unwrap();
        let res = simulate_write_with(&cfg, unit_input, WriteOptions { solver: Solver::Oracle, ..Default::default() }).unwrap();
        let r = res.report;
        assert!((r.leakage + r.n_eff + r.excited_loss - 100.0).abs() < 0.5);
        assert_eq!(r.n_eff_paper * 4.0, r.n_eff);
        assert_eq!(r.total_losses, 100.0 - r.n_eff);
        assert_eq!(leakage(&res).unwrap(), r.leakage);
        assert_eq!(n_eff(&res).unwrap(), r.n_eff);
        assert_eq!(total_losses(&res).unwrap(), r.total_losses);
        for v in [r.leakage, r.n_eff, r.excited_loss, r.total_losses] {
            assert!((0.0..=100.5).contains(&v));
        }
    }

    #[test]
    fn short_medium_is_transparent() {
        let cfg = SimulationConfig::new(3.0, 1e-6, 0.5).unwrap().with_grid(256, 4).unwrap();
        let r = simulate_write_with(&cfg, unit_input, WriteOptions::default()).unwrap().report;
        assert!((r.leakage - 100.0).abs() < 1e-3);
        assert!(r.n_eff < 1e-3);
    }

    #[test]
    fn zero_input_is_an_error() {
        let cfg = SimulationConfig::new(1.0, 1.0, 0.0).unwrap().with_grid(16, 8).unwrap();
        let zero = |_t: f64| Complex::new(0.0, 0.0);
        assert!(matches!(simulate_write(&cfg, zero), Err(Error::ZeroInputEnergy)));
    }

    #[test]
    fn profile_uses_quarter_normalization() {
        let grid = QuadratureGrid::spanning(0.0, 1.0, 2).unwrap();
        let s = StorageState { grid_z: grid, b: vec![Complex::new(2.0, 0.0); 3], c: vec![Complex::new(0.0, 0.0); 3], t: 1.0 };
        let t = storage_profile(&s);
        assert_eq!(t.rows[1], vec![0.5, 1.0]);
    }
}
