// Copyright 2026 The lambdamem Authors
// SPDX-License-Identifier: Apache-2.0

//! Direct integration of the rescaled equations
//!
//! ```text
//! dA/dz = -C/2,   dC/dt = -2irC + A + B,   dB/dt = -C
//! ```
//!
//! plus the adiabatic (Raman) reduction and kernel extraction from impulse
//! responses.

mod impulse;
mod raman;
pub(crate) mod stepper;

use std::io::Write;

use num_complex::Complex;

pub use impulse::impulse_response;
pub use raman::{integrate_raman, integrate_raman_read};

use crate::config::SimulationConfig;
use crate::error::{Error, Result};
use crate::io::emit::fmt_float;
use crate::scalar::Real;
use crate::special_math::{energy, simpson_energy, QuadratureGrid};
use stepper::{march, Layout};

/// Which arrays a run keeps besides the output column `A(t, L)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Recording {
    /// Output column only.
    #[default]
    Output,
    /// Full `A(t, z)`.
    Field,
    /// Full `A`, `B` and `C`.
    Full,
}

/// Signal envelope on the `(t, z)` grid, stored time-major (`it * nz + iz`).
#[derive(Debug, Clone)]
pub struct FieldHistory<T: Real> {
    pub(crate) grid_t: QuadratureGrid<T>,
    pub(crate) grid_z: QuadratureGrid<T>,
    pub(crate) output: Vec<Complex<T>>,
    pub(crate) a: Option<Vec<Complex<T>>>,
    pub(crate) b: Option<Vec<Complex<T>>>,
    pub(crate) c: Option<Vec<Complex<T>>>,
}

impl<T: Real> FieldHistory<T> {
    pub(crate) fn new(grid_t: QuadratureGrid<T>, grid_z: QuadratureGrid<T>, recording: Recording) -> Self {
        let n = grid_t.count() * grid_z.count();
        let zeros = || Some(vec![Complex::new(T::zero(), T::zero()); n]);
        let (a, bc) = match recording {
            Recording::Output => (None, false),
            Recording::Field => (zeros(), false),
            Recording::Full => (zeros(), true),
        };
        Self {
            grid_t,
            grid_z,
            output: vec![Complex::new(T::zero(), T::zero()); grid_t.count()],
            a,
            b: if bc { zeros() } else { None },
            c: if bc { zeros() } else { None },
        }
    }

    pub(crate) fn record(&mut self, it: usize, a: &[Complex<T>], b: &[Complex<T>], c: &[Complex<T>]) {
        let nz = self.grid_z.count();
        self.output[it] = a[nz - 1];
        let row = it * nz..(it + 1) * nz;
        if let Some(v) = &mut self.a {
            v[row.clone()].copy_from_slice(a);
        }
        if let Some(v) = &mut self.b {
            v[row.clone()].copy_from_slice(b);
        }
        if let Some(v) = &mut self.c {
            v[row].copy_from_slice(c);
        }
    }

    pub fn grid_t(&self) -> &QuadratureGrid<T> {
        &self.grid_t
    }

    pub fn grid_z(&self) -> &QuadratureGrid<T> {
        &self.grid_z
    }

    /// `A(t, L)` over the time grid.
    pub fn output(&self) -> &[Complex<T>] {
        &self.output
    }

    /// Full `A(t, z)` when recorded.
    pub fn field(&self) -> Option<&[Complex<T>]> {
        self.a.as_deref()
    }

    pub fn coherence_b(&self) -> Option<&[Complex<T>]> {
        self.b.as_deref()
    }

    pub fn coherence_c(&self) -> Option<&[Complex<T>]> {
        self.c.as_deref()
    }

    /// `A(t_it, z_iz)` when the full field was recorded.
    pub fn a(&self, it: usize, iz: usize) -> Option<Complex<T>> {
        self.a.as_ref().map(|v| v[it * self.grid_z.count() + iz])
    }

    /// `B(t, z_iz)` over time when recorded.
    pub fn b_column(&self, iz: usize) -> Option<Vec<Complex<T>>> {
        let nz = self.grid_z.count();
        self.b.as_ref().map(|v| (0..self.grid_t.count()).map(|it| v[it * nz + iz]).collect())
    }

    /// `C(t, z_iz)` over time when recorded.
    pub fn c_column(&self, iz: usize) -> Option<Vec<Complex<T>>> {
        let nz = self.grid_z.count();
        self.c.as_ref().map(|v| (0..self.grid_t.count()).map(|it| v[it * nz + iz]).collect())
    }

    /// `int |A(t, L)|^2 dt`.
    pub fn output_energy(&self) -> T {
        simpson_energy(&self.output, self.grid_t.step())
    }

    /// CSV `t,z,re_a,im_a,re_b,im_b,re_c,im_c`, keeping every `decimate`-th
    /// sample on each axis (the last row and column are always kept).
    /// Unrecorded coherences are written as 0; without a full field only the
    /// output column is written.
    pub fn write_csv<W: Write>(&self, out: &mut W, decimate: usize) -> Result<()> {
        let step = decimate.max(1);
        let pick = |n: usize| -> Vec<usize> {
            let mut v: Vec<usize> = (0..n).step_by(step).collect();
            if v.last() != Some(&(n - 1)) {
                v.push(n - 1);
            }
            v
        };
        let nz = self.grid_z.count();
        let zs = if self.a.is_some() { pick(nz) } else { vec![nz - 1] };
        writeln!(out, "t,z,re_a,im_a,re_b,im_b,re_c,im_c")?;
        let zero = Complex::new(T::zero(), T::zero());
        for it in pick(self.grid_t.count()) {
            for &iz in &zs {
                let a = self.a(it, iz).unwrap_or(self.output[it]);
                let b = self.b.as_ref().map_or(zero, |v| v[it * nz + iz]);
                let c = self.c.as_ref().map_or(zero, |v| v[it * nz + iz]);
                writeln!(
                    out,
                    "{},{},{},{},{},{},{},{}",
                    fmt_float(self.grid_t.point(it).to_f64_lossy()),
                    fmt_float(self.grid_z.point(iz).to_f64_lossy()),
                    fmt_float(a.re.to_f64_lossy()),
                    fmt_float(a.im.to_f64_lossy()),
                    fmt_float(b.re.to_f64_lossy()),
                    fmt_float(b.im.to_f64_lossy()),
                    fmt_float(c.re.to_f64_lossy()),
                    fmt_float(c.im.to_f64_lossy())
                )?;
            }
        }
        Ok(())
    }
}

/// Coherence profiles `B(z)`, `C(z)` at the end of a stage.
#[derive(Debug, Clone, PartialEq)]
pub struct StorageState<T: Real> {
    pub grid_z: QuadratureGrid<T>,
    pub b: Vec<Complex<T>>,
    pub c: Vec<Complex<T>>,
    pub t: T,
}

impl<T: Real> StorageState<T> {
    pub fn zero(grid_z: QuadratureGrid<T>) -> Self {
        let n = grid_z.count();
        Self {
            grid_z,
            b: vec![Complex::new(T::zero(), T::zero()); n],
            c: vec![Complex::new(T::zero(), T::zero()); n],
            t: T::zero(),
        }
    }

    /// `(1/2) int |B|^2 dz`.
    pub fn b_energy(&self) -> T {
        energy(&self.b, self.grid_z.step()) / T::lit(2.0)
    }

    /// `(1/2) int |C|^2 dz`.
    pub fn c_energy(&self) -> T {
        energy(&self.c, self.grid_z.step()) / T::lit(2.0)
    }

    /// Profile mirrored in `z`.
    pub fn reversed(&self) -> Self {
        let mut out = self.clone();
        out.b.reverse();
        out.c.reverse();
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Direction {
    #[default]
    Forward,
    Backward,
}

impl Direction {
    pub fn as_str(&self) -> &'static str {
        match self {
            Direction::Forward => "forward",
            Direction::Backward => "backward",
        }
    }
}

impl std::str::FromStr for Direction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "forward" => Ok(Direction::Forward),
            "backward" => Ok(Direction::Backward),
            _ => Err(Error::Config(format!("unknown direction `{s}`"))),
        }
    }
}

/// Photon bookkeeping of one write: every entry is a fraction of `e_in`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyBalance<T> {
    pub e_in: T,
    pub transmitted: T,
    pub stored_b: T,
    pub stored_c: T,
    /// `|e_in - e_out - stored_b - stored_c| / e_in`
    pub residual: T,
}

/// Input energy `int |a_in|^2 dt` sampled on `grid_t`.
pub fn input_energy<T: Real, F: Fn(T) -> Complex<T>>(grid_t: &QuadratureGrid<T>, input: F) -> T {
    let samples: Vec<_> = grid_t.points().map(&input).collect();
    energy(&samples, grid_t.step())
}

/// Global balance of a write run.
pub fn global_balance<T: Real>(history: &FieldHistory<T>, state: &StorageState<T>, e_in: T) -> Result<EnergyBalance<T>> {
    if !(e_in > T::zero()) {
        return Err(Error::ZeroInputEnergy);
    }
    let out = history.output_energy();
    let sb = state.b_energy();
    let sc = state.c_energy();
    Ok(EnergyBalance {
        e_in,
        transmitted: out / e_in,
        stored_b: sb / e_in,
        stored_c: sc / e_in,
        residual: (e_in - out - sb - sc).abs() / e_in,
    })
}

/// Unit rectangular pulse.
pub fn unit_input<T: Real>(_t: T) -> Complex<T> {
    Complex::new(T::one(), T::zero())
}

/// Write stage: zero initial coherences, `A(t, 0) = input(t)` over `[0, t_write]`.
pub fn integrate_write<T, F>(
    config: &SimulationConfig<T>,
    input: F,
    recording: Recording,
) -> Result<(FieldHistory<T>, StorageState<T>)>
where
    T: Real,
    F: Fn(T) -> Complex<T>,
{
    config.validate()?;
    let grid_t = config.write_grid()?;
    let grid_z = config.grid_z()?;
    let nz = grid_z.count();
    let init = vec![Complex::new(T::zero(), T::zero()); 2 * nz];
    run(&grid_t, &grid_z, config.detuning.r(), input, init, recording)
}

/// Read stage from a stored profile: no input, `C(0, z) = 0`, and the
/// profile is mirrored in `z` for backward retrieval.
pub fn integrate_read<T: Real>(
    state: &StorageState<T>,
    config: &SimulationConfig<T>,
    direction: Direction,
    recording: Recording,
) -> Result<(FieldHistory<T>, StorageState<T>)> {
    config.validate()?;
    let grid_t = config.read_grid()?;
    let grid_z = config.grid_z()?;
    if state.grid_z != grid_z {
        return Err(Error::GridMismatch("stored profile and read grid differ in z".into()));
    }
    let nz = grid_z.count();
    let mut init = vec![Complex::new(T::zero(), T::zero()); 2 * nz];
    match direction {
        Direction::Forward => init[..nz].copy_from_slice(&state.b),
        Direction::Backward => {
            for (dst, src) in init[..nz].iter_mut().zip(state.b.iter().rev()) {
                *dst = *src;
            }
        }
    }
    let zero = |_t: T| Complex::new(T::zero(), T::zero());
    run(&grid_t, &grid_z, config.detuning.r(), zero, init, recording)
}

fn run<T, F>(
    grid_t: &QuadratureGrid<T>,
    grid_z: &QuadratureGrid<T>,
    r: T,
    input: F,
    init: Vec<Complex<T>>,
    recording: Recording,
) -> Result<(FieldHistory<T>, StorageState<T>)>
where
    T: Real,
    F: Fn(T) -> Complex<T>,
{
    let nz = grid_z.count();
    let mut history = FieldHistory::new(*grid_t, *grid_z, recording);
    let y = march(grid_t, grid_z, r, Layout::Plain, input, init, |it, s, a| {
        history.record(it, a, &s[..nz], &s[nz..2 * nz]);
    })?;
    let state = StorageState {
        grid_z: *grid_z,
        b: y[..nz].to_vec(),
        c: y[nz..].to_vec(),
        t: grid_t.end(),
    };
    Ok((history, state))
}

/// Largest local violation of `d|A|^2/dz + (1/2) d(|B|^2 + |C|^2)/dt = 0`,
/// by central differences over interior nodes, relative to `max |A|^2`.
pub fn conservation_residual<T: Real>(history: &FieldHistory<T>) -> Result<T> {
    let (Some(a), Some(b), Some(c)) = (&history.a, &history.b, &history.c) else {
        return Err(Error::Unsupported("conservation residual needs a full recording"));
    };
    let nt = history.grid_t.count();
    let nz = history.grid_z.count();
    let peak = a.iter().fold(T::zero(), |m, v| m.max(v.norm_sqr()));
    if peak == T::zero() || nt < 3 || nz < 3 {
        return Ok(T::zero());
    }
    let dz2 = T::lit(2.0) * history.grid_z.step();
    let dt4 = T::lit(4.0) * history.grid_t.step();
    let e = |it: usize, iz: usize| b[it * nz + iz].norm_sqr() + c[it * nz + iz].norm_sqr();
    let mut worst = T::zero();
    for it in 1..nt - 1 {
        for iz in 1..nz - 1 {
            let dadz = (a[it * nz + iz + 1].norm_sqr() - a[it * nz + iz - 1].norm_sqr()) / dz2;
            let dedt = (e(it + 1, iz) - e(it - 1, iz)) / dt4;
            worst = worst.max((dadz + dedt).abs());
        }
    }
    Ok(worst / peak)
}

/// Repeats `run` with doubled resolution until `observe` changes by less than
/// `tol` (relative), at most `max_doublings` times. Returns the last result
/// and the configuration that produced it.
pub fn refine_until_converged<T, R, Run, Obs>(
    config: &SimulationConfig<T>,
    tol: T,
    max_doublings: usize,
    run: Run,
    observe: Obs,
) -> Result<(R, SimulationConfig<T>)>
where
    T: Real,
    Run: Fn(&SimulationConfig<T>) -> Result<R>,
    Obs: Fn(&R) -> T,
{
    let mut cfg = *config;
    let mut last = run(&cfg)?;
    for _ in 0..max_doublings {
        let next_cfg = cfg.refined();
        let next = run(&next_cfg)?;
        let (a, b) = (observe(&last), observe(&next));
        let scale = b.abs().max(T::epsilon());
        last = next;
        cfg = next_cfg;
        if (a - b).abs() / scale < tol {
            break;
        }
    }
    Ok((last, cfg))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(t: f64, l: f64, r: f64, nt: usize, nz: usize) -> SimulationConfig<f64> {
        SimulationConfig::new(t, l, r).unwrap().with_grid(nt, nz).unwrap()
    }

    #[test]
    fn zero_input_stays_zero() {
        let c = cfg(3.0, 5.0, 0.5, 64, 32);
        let zero = |_t: f64| Complex::new(0.0, 0.0);
        let (h, s) = integrate_write(&c, zero, Recording::Full).unwrap();
        assert!(h.field().unwrap().iter().all(|v| v.norm() == 0.0));
        assert!(s.b.iter().chain(&s.c).all(|v| v.norm() == 0.0));
        let (h, _) = integrate_read(&s, &c, Direction::Backward, Recording::Output).unwrap();
        assert!(h.output().iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn entrance_column_at_resonance() {
        // B(t,0) = -2 sin^2(t/2), C(t,0) = sin t
        let c = cfg(6.0, 4.0, 0.0, 2048, 16);
        let (h, _) = integrate_write(&c, unit_input, Recording::Full).unwrap();
        let b = h.b_column(0).unwrap();
        let cc = h.c_column(0).unwrap();
        for (it, t) in h.grid_t().points().enumerate() {
            assert!((b[it] - Complex::new(-2.0 * (t / 2.0).sin().powi(2), 0.0)).norm() < 1e-10);
            assert!((cc[it] - Complex::new(t.sin(), 0.0)).norm() < 1e-10);
        }
    }

    #[test]
    fn balance_closes_on_a_small_grid() {
        let c = cfg(3.0, 10.0, 0.5, 512, 256);
        let (h, s) = integrate_write(&c, unit_input, Recording::Output).unwrap();
        let e_in = input_energy(&c.write_grid().unwrap(), unit_input);
        let bal = global_balance(&h, &s, e_in).unwrap();
        assert!(bal.residual < 1e-3, "{bal:?}");
        assert!(bal.stored_b > 0.5);
    }

    #[test]
    fn read_grid_mismatch_is_rejected() {
        let c = cfg(3.0, 10.0, 0.5, 64, 32);
        let s = StorageState::zero(QuadratureGrid::spanning(0.0, 10.0, 16).unwrap());
        assert!(matches!(
            integrate_read(&s, &c, Direction::Forward, Recording::Output),
            Err(Error::GridMismatch(_))
        ));
    }

    #[test]
    fn residual_needs_full_recording() {
        let c = cfg(1.0, 1.0, 0.0, 16, 8);
        let (h, _) = integrate_write(&c, unit_input, Recording::Field).unwrap();
        assert!(conservation_residual(&h).is_err());
    }

    #[test]
    fn csv_export_has_expected_shape() {
        let c = cfg(1.0, 1.0, 0.0, 8, 4);
        let (h, _) = integrate_write(&c, unit_input, Recording::Full).unwrap();
        let mut buf = Vec::new();
        h.write_csv(&mut buf, 2).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "t,z,re_a,im_a,re_b,im_b,re_c,im_c");
        // write grid has 4 intervals (t_read = 2 t_write): t rows 0,2,4; z cols 0,2,4
        assert_eq!(lines.len(), 1 + 3 * 3);
    }

    #[test]
    fn refinement_stops_when_converged() {
        let c = cfg(2.0, 2.0, 0.0, 32, 16);
        let (_, used) = refine_until_converged(
            &c,
            1e-3,
            4,
            |cc| integrate_write(cc, unit_input, Recording::Output).map(|(h, _)| h.output_energy()),
            |e| *e,
        )
        .unwrap();
        assert!(used.steps_t > 32 && used.steps_t <= 32 * 16);
    }
}
