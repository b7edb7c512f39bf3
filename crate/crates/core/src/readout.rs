// Copyright 2026 The lambdamem Authors
// SPDX-License-Identifier: Apache-2.0

//! Read-out: retrieved field from a stored coherence profile.
//!
//! The kernel path evaluates
//!
//! ```text
//! A(t, L) = -(1/2) int_0^L B'(L - s) G_ba(t, s) ds
//! ```
//!
//! where `B'` is the stored `B` profile, mirrored in `z` for backward
//! retrieval. The optical coherence is zero when the read starts and no
//! signal enters the medium.

use num_complex::Complex;
use serde_json::{json, Value};

use crate::config::SimulationConfig;
use crate::dynamics::{integrate_raman_read, integrate_read, Direction, Recording, StorageState};
use crate::error::{Error, Result};
use crate::io::emit::{Artifact, Table};
use crate::io::physical::PhysicalParams;
use crate::kernels::{build_kernel, KernelCache, KernelField, KernelName};
use crate::scalar::Real;
use crate::special_math::{energy, QuadratureGrid};
use crate::writing::{simulate_write_with, Solver, WriteOptions, WriteResult};

/// Retrieved signal over `[0, t_read]`.
#[derive(Debug, Clone)]
pub struct ReadResult<T: Real> {
    /// `A(t, L)` on `grid_t`.
    pub output: Vec<Complex<T>>,
    pub grid_t: QuadratureGrid<T>,
    pub direction: Direction,
    /// Retrieved energy, percent of the write input energy.
    pub efficiency: f64,
    /// Stored `B` energy at the start of the read, percent of input.
    pub stored_fraction: f64,
    /// `stored_fraction - efficiency`.
    pub residual_stored: f64,
    /// `B` and `C` energy left in the medium at the end of the read, when
    /// the solver integrates the medium state.
    pub remaining: Option<f64>,
    pub solver: Solver,
}

impl<T: Real> ReadResult<T> {
    /// Output intensity `|A(t, L)|^2`.
    pub fn intensity(&self) -> Vec<f64> {
        self.output.iter().map(|a| a.norm_sqr().to_f64_lossy()).collect()
    }
}

impl<T: Real> Artifact for ReadResult<T> {
    fn table(&self) -> Table {
        let mut t = Table::new(&["t", "abs_a_sq", "re", "im"]);
        for (it, a) in self.output.iter().enumerate() {
            t.push(vec![
                self.grid_t.point(it).to_f64_lossy(),
                a.norm_sqr().to_f64_lossy(),
                a.re.to_f64_lossy(),
                a.im.to_f64_lossy(),
            ]);
        }
        t
    }

    fn json(&self) -> Value {
        json!({
            "direction": self.direction.as_str(),
            "efficiency": self.efficiency,
            "stored_fraction": self.stored_fraction,
            "residual_stored": self.residual_stored,
            "remaining": self.remaining,
            "solver": self.solver.as_str(),
            "t_read": self.grid_t.end().to_f64_lossy(),
        })
    }
}

/// Options for [`simulate_read_with`].
#[derive(Debug, Clone, Copy, Default)]
pub struct ReadOptions<'a, T: Real> {
    pub solver: Solver,
    pub cache: Option<&'a KernelCache<T>>,
    /// Request transverse diffraction accounting (not modelled).
    pub diffraction: bool,
}

/// `100 int |A|^2 dt / E_in`.
pub fn efficiency<T: Real>(output: &[Complex<T>], grid_t: &QuadratureGrid<T>, input_energy: T) -> Result<f64> {
    if !(input_energy > T::zero()) {
        return Err(Error::ZeroInputEnergy);
    }
    if output.len() != grid_t.count() {
        return Err(Error::GridMismatch(format!("{} output samples on {} nodes", output.len(), grid_t.count())));
    }
    Ok(100.0 * (energy(output, grid_t.step()) / input_energy).to_f64_lossy())
}

pub fn simulate_read<T: Real>(
    stored: &StorageState<T>,
    input_energy: T,
    config: &SimulationConfig<T>,
    direction: Direction,
    solver: Solver,
) -> Result<ReadResult<T>> {
    simulate_read_with(stored, input_energy, config, direction, ReadOptions { solver, ..Default::default() })
}

pub fn simulate_read_with<T: Real>(
    stored: &StorageState<T>,
    input_energy: T,
    config: &SimulationConfig<T>,
    direction: Direction,
    options: ReadOptions<'_, T>,
) -> Result<ReadResult<T>> {
    if options.diffraction && direction == Direction::Backward {
        return Err(Error::Unsupported("diffraction accounting for backward retrieval"));
    }
    config.validate()?;
    if !(input_energy > T::zero()) {
        return Err(Error::ZeroInputEnergy);
    }
    let grid_t = config.read_grid()?;
    let grid_z = config.grid_z()?;
    if stored.grid_z != grid_z {
        return Err(Error::GridMismatch("stored profile and read grid differ in z".into()));
    }
    let (output, remaining) = match options.solver {
        Solver::Kernel => {
            let gba = match options.cache {
                Some(c) => c.get_or_build(KernelName::Ba, &grid_t, &grid_z, &config.detuning, config.strategy)?,
                None => std::sync::Arc::new(build_kernel(
                    KernelName::Ba,
                    &grid_t,
                    &grid_z,
                    &config.detuning,
                    config.strategy,
                )?),
            };
            (kernel_read(&stored.b, &gba, direction), None)
        }
        Solver::Oracle | Solver::Raman => {
            let (hist, end) = if options.solver == Solver::Oracle {
                integrate_read(stored, config, direction, Recording::Output)?
            } else {
                integrate_raman_read(stored, config, direction, Recording::Output)?
            };
            let left = 100.0 * ((end.b_energy() + end.c_energy()) / input_energy).to_f64_lossy();
            (hist.output().to_vec(), Some(left))
        }
    };
    let eff = efficiency(&output, &grid_t, input_energy)?;
    let stored_fraction = 100.0 * (stored.b_energy() / input_energy).to_f64_lossy();
    Ok(ReadResult {
        output,
        grid_t,
        direction,
        efficiency: eff,
        stored_fraction,
        residual_stored: stored_fraction - eff,
        remaining,
        solver: options.solver,
    })
}

/// `-(1/2) int_0^L B'(L - s) G_ba(t, s) ds` by the trapezoid rule in `s`.
fn kernel_read<T: Real>(b: &[Complex<T>], gba: &KernelField<T>, direction: Direction) -> Vec<Complex<T>> {
    let nz = b.len();
    let nt = gba.grid_t().count();
    let dz = gba.grid_z().step();
    let mut out = vec![Complex::new(T::zero(), T::zero()); nt];
    for iz in 0..nz {
        // B'(L - s_iz)
        let src = match direction {
            Direction::Forward => b[nz - 1 - iz],
            Direction::Backward => b[iz],
        };
        let w = if iz == 0 || iz == nz - 1 { T::lit(0.5) } else { T::one() };
        let coef = src.scale(-T::lit(0.5) * w * dz);
        for (o, g) in out.iter_mut().zip(gba.column(iz)) {
            *o = *o + coef * g;
        }
    }
    out
}

/// Write followed by a zero-gap read with the same solver.
pub fn write_then_read<T, F>(
    config: &SimulationConfig<T>,
    input: F,
    direction: Direction,
    solver: Solver,
) -> Result<(WriteResult<T>, ReadResult<T>)>
where
    T: Real,
    F: Fn(T) -> Complex<T> + Sync,
{
    let cache = KernelCache::new();
    let w = simulate_write_with(config, input, WriteOptions { solver, recording: Recording::Output, cache: Some(&cache) })?;
    let r = simulate_read_with(
        &w.stored,
        w.input_energy,
        config,
        direction,
        ReadOptions { solver, cache: Some(&cache), diffraction: false },
    )?;
    Ok((w, r))
}

/// Retrieved field as the double integral over write time and position,
///
/// ```text
/// a(t) = (1/2) int dt' a_in(T_W - t') int ds G_ab(t', s*) G_ba(t, s)
/// ```
///
/// with `s* = s` for backward and `L - s` for forward retrieval. Costs
/// `O(n_write n_read n_z)`; intended for cross-checks on small grids.
pub fn composition_read<T, F>(config: &SimulationConfig<T>, input: F, direction: Direction) -> Result<Vec<Complex<T>>>
where
    T: Real,
    F: Fn(T) -> Complex<T>,
{
    config.validate()?;
    let gw = config.write_grid()?;
    let gr = config.read_grid()?;
    let gz = config.grid_z()?;
    let gab = build_kernel(KernelName::Ab, &gw, &gz, &config.detuning, config.strategy)?;
    let gba = build_kernel(KernelName::Ba, &gr, &gz, &config.detuning, config.strategy)?;
    let nw = gw.count();
    let nz = gz.count();
    let t_w = gw.end();
    let a_in: Vec<Complex<T>> = gw.points().map(|t| input(t_w - t)).collect();
    let trap = |i: usize, n: usize| if i == 0 || i == n - 1 { T::lit(0.5) } else { T::one() };
    let scale = T::lit(0.5) * gw.step() * gz.step();
    let out = (0..gr.count())
        .map(|it| {
            let mut acc = Complex::new(T::zero(), T::zero());
            for iz in 0..nz {
                let star = match direction {
                    Direction::Backward => iz,
                    Direction::Forward => nz - 1 - iz,
                };
                let mut inner = Complex::new(T::zero(), T::zero());
                for iw in 0..nw {
                    inner = inner + (a_in[iw] * gab.smooth(iw, star)).scale(trap(iw, nw));
                }
                acc = acc + (inner * gba.smooth(it, iz)).scale(trap(iz, nz));
            }
            acc.scale(scale)
        })
        .collect();
    Ok(out)
}

/// Running efficiency `100 int_0^t |A|^2 / E_in` at every node.
pub fn cumulative_efficiency<T: Real>(read: &ReadResult<T>, input_energy: T) -> Vec<f64> {
    let h = read.grid_t.step().to_f64_lossy();
    let e = input_energy.to_f64_lossy();
    let mut acc = 0.0;
    let mut out = Vec::with_capacity(read.output.len());
    let mut prev: Option<f64> = None;
    for a in &read.output {
        let v = a.norm_sqr().to_f64_lossy();
        if let Some(p) = prev {
            acc += 0.5 * h * (p + v);
        }
        prev = Some(v);
        out.push(100.0 * acc / e);
    }
    out
}

/// First time at which the running efficiency reaches `fraction` of its final value.
pub fn time_to_fraction<T: Real>(read: &ReadResult<T>, input_energy: T, fraction: f64) -> Option<f64> {
    let cum = cumulative_efficiency(read, input_energy);
    let last = *cum.last()?;
    if !(last > 0.0) {
        return None;
    }
    let it = cum.iter().position(|&v| v >= fraction * last)?;
    Some(read.grid_t.point(it).to_f64_lossy())
}

/// Indices of local maxima whose topographic prominence is at least `min_prominence`.
pub fn peaks(samples: &[f64], min_prominence: f64) -> Vec<usize> {
    let n = samples.len();
    let mut found = Vec::new();
    for i in 1..n.saturating_sub(1) {
        let h = samples[i];
        if !(h > samples[i - 1] && h >= samples[i + 1]) {
            continue;
        }
        let mut left = h;
        for &v in samples[..i].iter().rev() {
            if v > h {
                break;
            }
            left = left.min(v);
        }
        let mut right = h;
        for &v in &samples[i + 1..] {
            if v > h {
                break;
            }
            right = right.min(v);
        }
        if h - left.max(right) >= min_prominence {
            found.push(i);
        }
    }
    found
}

/// Median spacing between prominent maxima, or `None` with fewer than two.
/// Peaks count when their prominence is at least `rel_prominence` times the
/// sample range.
pub fn oscillation_period(samples: &[f64], step: f64, rel_prominence: f64) -> Option<f64> {
    let (lo, hi) = samples.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let p = peaks(samples, rel_prominence * (hi - lo));
    if p.len() < 2 {
        return None;
    }
    let mut gaps: Vec<f64> = p.windows(2).map(|w| (w[1] - w[0]) as f64 * step).collect();
    gaps.sort_by(f64::total_cmp);
    let m = gaps.len();
    Some(if m % 2 == 1 { gaps[m / 2] } else { 0.5 * (gaps[m / 2 - 1] + gaps[m / 2]) })
}

/// Fresnel number `S / (lambda L)`.
pub fn fresnel_number(params: &PhysicalParams) -> Result<f64> {
    for (what, v) in [("beam_area", params.beam_area), ("wavelength", params.wavelength), ("length", params.length)] {
        if !(v > 0.0) {
            return Err(Error::NonPositive { what, value: v });
        }
    }
    Ok(params.beam_area / (params.wavelength * params.length))
}

/// Transverse mode capacity: `F_N^2` forward, `F_N` backward.
pub fn mode_capacity(params: &PhysicalParams, direction: Direction) -> Result<f64> {
    let f = fresnel_number(params)?;
    Ok(match direction {
        Direction::Forward => f * f,
        Direction::Backward => f,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::unit_input;

    fn cfg(t_w: f64, t_r: f64, l: f64, r: f64, nt: usize, nz: usize) -> SimulationConfig<f64> {
        SimulationConfig::new(t_w, l, r).unwrap().with_t_read(t_r).unwrap().with_grid(nt, nz).unwrap()
    }

    fn geometry(area: f64, wavelength: f64, length: f64) -> PhysicalParams {
        PhysicalParams {
            rabi: 1e9,
            detuning: 0.0,
            coupling_density: 1e6,
            length,
            pulse_duration: 1e-9,
            gamma: 1e7,
            wavelength,
            beam_area: area,
        }
    }

    #[test]
    fn zero_stored_state_gives_nothing() {
        let c = cfg(3.0, 6.0, 5.0, 0.0, 256, 64);
        let s = StorageState::zero(c.grid_z().unwrap());
        for solver in [Solver::Kernel, Solver::Oracle] {
            let r = simulate_read(&s, 1.0, &c, Direction::Backward, solver).unwrap();
            assert_eq!(r.efficiency, 0.0);
            assert!(r.output.iter().all(|a| a.norm() == 0.0));
        }
    }

    #[test]
    fn zero_input_energy_is_an_error() {
        let g = QuadratureGrid::spanning(0.0, 1.0, 4).unwrap();
        let out = vec![Complex::new(0.0, 0.0); 5];
        assert!(matches!(efficiency(&out, &g, 0.0), Err(Error::ZeroInputEnergy)));
    }

    #[test]
    fn kernel_read_matches_oracle_read() {
        for r in [0.0, 0.5, 1.0] {
            let c = cfg(3.0, 8.0, 10.0, r, 1024, 256);
            for dir in [Direction::Forward, Direction::Backward] {
                let (_, k) = write_then_read(&c, unit_input, dir, Solver::Kernel).unwrap();
                let (_, o) = write_then_read(&c, unit_input, dir, Solver::Oracle).unwrap();
                assert!((k.efficiency - o.efficiency).abs() < 0.5, "r={r} {dir:?}: {} vs {}", k.efficiency, o.efficiency);
            }
        }
    }

    #[test]
    fn composition_form_equals_single_integral() {
        let c = cfg(2.0, 4.0, 3.0, 0.3, 48, 24);
        for dir in [Direction::Forward, Direction::Backward] {
            let (_, single) = write_then_read(&c, unit_input, dir, Solver::Kernel).unwrap();
            let double = composition_read(&c, unit_input, dir).unwrap();
            let num: f64 = single.output.iter().zip(&double).map(|(a, b)| (a - b).norm_sqr()).sum();
            let den: f64 = single.output.iter().map(|a| a.norm_sqr()).sum();
            assert!((num / den).sqrt() < 1e-4, "{dir:?}: {}", (num / den).sqrt());
        }
    }

    #[test]
    fn oracle_read_conserves_photons() {
        let c = cfg(3.0, 10.0, 10.0, 0.5, 1024, 256);
        let (_, rd) = write_then_read(&c, unit_input, Direction::Backward, Solver::Oracle).unwrap();
        let left = rd.remaining.unwrap();
        assert!((rd.efficiency + left - rd.stored_fraction).abs() < 0.05, "{} + {left} vs {}", rd.efficiency, rd.stored_fraction);
    }

    #[test]
    fn diffraction_on_backward_is_unsupported() {
        let c = cfg(3.0, 6.0, 5.0, 0.0, 64, 16);
        let s = StorageState::zero(c.grid_z().unwrap());
        let o = ReadOptions { diffraction: true, ..Default::default() };
        assert!(matches!(simulate_read_with(&s, 1.0, &c, Direction::Backward, o), Err(Error::Unsupported(_))));
    }

    #[test]
    fn running_efficiency_is_monotone() {
        let c = cfg(3.0, 10.0, 10.0, 0.0, 512, 128);
        let (w, rd) = write_then_read(&c, unit_input, Direction::Backward, Solver::Kernel).unwrap();
        let cum = cumulative_efficiency(&rd, w.input_energy);
        assert!(cum.windows(2).all(|p| p[1] >= p[0]));
        assert!((cum.last().unwrap() - rd.efficiency).abs() < 1e-9);
        let t95 = time_to_fraction(&rd, w.input_energy, 0.95).unwrap();
        assert!(t95 > 0.0 && t95 <= 10.0);
    }

    #[test]
    fn period_of_a_pure_tone() {
        let step = 0.01;
        let s: Vec<f64> = (0..5000).map(|i| (i as f64 * step * 2.0 * std::f64::consts::PI / 3.7).sin()).collect();
        let p = oscillation_period(&s, step, 0.1).unwrap();
        assert!((p - 3.7).abs() < 0.02, "{p}");
        let mono: Vec<f64> = (0..100).map(|i| i as f64).collect();
        assert!(oscillation_period(&mono, 1.0, 0.01).is_none());
    }

    #[test]
    fn small_wiggles_are_not_peaks() {
        let s = [0.0, 1.0, 0.999, 1.0005, 0.0];
        assert_eq!(peaks(&s, 0.01).len(), 1);
        assert_eq!(peaks(&s, 0.0).len(), 2);
    }

    #[test]
    fn unit_fresnel_number() {
        let p = geometry(795e-9 * 0.01, 795e-9, 0.01);
        assert!((mode_capacity(&p, Direction::Forward).unwrap() - 1.0).abs() < 1e-12);
        assert!((mode_capacity(&p, Direction::Backward).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fresnel_capacity_of_a_millimetre_beam() {
        let p = geometry(1e-6, 795e-9, 0.01);
        let f = fresnel_number(&p).unwrap();
        assert!((f - 125.786).abs() < 1e-3, "{f}");
        let fw = mode_capacity(&p, Direction::Forward).unwrap();
        let bw = mode_capacity(&p, Direction::Backward).unwrap();
        assert!((fw - 15_822.2).abs() < 1.0, "{fw}");
        assert!((fw / bw - f).abs() < 1e-9);
        assert!(fresnel_number(&geometry(0.0, 1e-6, 1.0)).is_err());
    }
}
