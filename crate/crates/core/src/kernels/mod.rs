// Copyright 2026 The lambdamem Authors
// SPDX-License-Identifier: Apache-2.0

//! Green's-function kernels on a `(t, z)` grid.
//!
//! A kernel `G_ik` maps a source `i` (signal `a`, spin coherence `b` or
//! optical coherence `c`) to a response `k`. Dirac parts are kept apart from
//! the sampled smooth part: `delta_t_weight` multiplies `delta(t)` and
//! `delta_z` holds the time-dependent coefficient of `delta(z)`.

mod cache;
pub(crate) mod convolution;
mod elementary;

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use num_complex::Complex;
use rayon::prelude::*;

pub use cache::KernelCache;
pub use elementary::{
    cancellation_bound, eval_f0, eval_f1, eval_f_smooth, eval_time_factor, CouplingWeights, DetuningParams,
    TimeFactor,
};
pub(crate) use elementary::{time_factor, Branch};

use crate::error::{Error, Result};
use crate::io::emit::fmt_float;
use crate::scalar::Real;
use crate::special_math::QuadratureGrid;
use convolution::Convolver;

/// Auto strategy falls back to the impulse path above this many lost digits.
pub const CANCELLATION_LIMIT: f64 = 9.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum KernelName {
    Aa,
    Ba,
    Ca,
    Ab,
    Bb,
    Cb,
    Ac,
    Bc,
    Cc,
}

impl KernelName {
    pub const ALL: [KernelName; 9] = [
        KernelName::Aa,
        KernelName::Ba,
        KernelName::Ca,
        KernelName::Ab,
        KernelName::Bb,
        KernelName::Cb,
        KernelName::Ac,
        KernelName::Bc,
        KernelName::Cc,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            KernelName::Aa => "aa",
            KernelName::Ba => "ba",
            KernelName::Ca => "ca",
            KernelName::Ab => "ab",
            KernelName::Bb => "bb",
            KernelName::Cb => "cb",
            KernelName::Ac => "ac",
            KernelName::Bc => "bc",
            KernelName::Cc => "cc",
        }
    }
}

impl fmt::Display for KernelName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for KernelName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        KernelName::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown kernel name `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelStrategy {
    Analytic,
    Impulse,
    #[default]
    Auto,
}

impl KernelStrategy {
    pub fn as_str(&self) -> &'static str {
        match self {
            KernelStrategy::Analytic => "analytic",
            KernelStrategy::Impulse => "impulse",
            KernelStrategy::Auto => "auto",
        }
    }
}

impl FromStr for KernelStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "analytic" => Ok(KernelStrategy::Analytic),
            "impulse" => Ok(KernelStrategy::Impulse),
            "auto" => Ok(KernelStrategy::Auto),
            _ => Err(Error::Config(format!("unknown strategy `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Provenance {
    Analytic,
    Impulse,
}

impl Provenance {
    pub fn as_str(&self) -> &'static str {
        match self {
            Provenance::Analytic => "analytic",
            Provenance::Impulse => "impulse",
        }
    }
}

/// A kernel sampled on a grid. Smooth samples are stored per `z` column.
#[derive(Debug, Clone)]
pub struct KernelField<T: Real> {
    pub(crate) name: KernelName,
    pub(crate) grid_t: QuadratureGrid<T>,
    pub(crate) grid_z: QuadratureGrid<T>,
    pub(crate) delta_t_weight: Complex<T>,
    pub(crate) delta_z: Option<Vec<Complex<T>>>,
    pub(crate) smooth: Vec<Complex<T>>,
    pub(crate) provenance: Provenance,
    pub(crate) params: DetuningParams<T>,
}

impl<T: Real> KernelField<T> {
    pub fn name(&self) -> KernelName {
        self.name
    }

    pub fn grid_t(&self) -> &QuadratureGrid<T> {
        &self.grid_t
    }

    pub fn grid_z(&self) -> &QuadratureGrid<T> {
        &self.grid_z
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn params(&self) -> &DetuningParams<T> {
        &self.params
    }

    /// Coefficient of `delta(t)`.
    pub fn delta_t_weight(&self) -> Complex<T> {
        self.delta_t_weight
    }

    /// Coefficient of `delta(z)` sampled on the time grid, if present.
    pub fn delta_z(&self) -> Option<&[Complex<T>]> {
        self.delta_z.as_deref()
    }

    #[inline]
    pub fn smooth(&self, it: usize, iz: usize) -> Complex<T> {
        self.smooth[iz * self.grid_t.count() + it]
    }

    /// Smooth samples over time at grid column `iz`.
    pub fn column(&self, iz: usize) -> &[Complex<T>] {
        let nt = self.grid_t.count();
        &self.smooth[iz * nt..(iz + 1) * nt]
    }

    /// Relative L2 distance of the smooth parts, `|self - other| / |other|`.
    pub fn relative_l2_difference(&self, other: &KernelField<T>) -> Result<T> {
        self.check_same_grid(other)?;
        let mut num = T::zero();
        let mut den = T::zero();
        for (a, b) in self.smooth.iter().zip(&other.smooth) {
            num = num + (a - b).norm_sqr();
            den = den + b.norm_sqr();
        }
        Ok(if den > T::zero() { (num / den).sqrt() } else { num.sqrt() })
    }

    /// Largest pointwise difference of the smooth parts.
    pub fn max_abs_difference(&self, other: &KernelField<T>) -> Result<T> {
        self.check_same_grid(other)?;
        Ok(self
            .smooth
            .iter()
            .zip(&other.smooth)
            .fold(T::zero(), |m, (a, b)| m.max((a - b).norm())))
    }

    fn check_same_grid(&self, other: &KernelField<T>) -> Result<()> {
        if self.grid_t != other.grid_t || self.grid_z != other.grid_z {
            return Err(Error::GridMismatch("kernels sampled on different grids".into()));
        }
        Ok(())
    }

    /// Writes `<stem>.csv` (`t,z,re,im`) and the `<stem>.json` sidecar into `dir`.
    pub fn dump(&self, dir: &Path, stem: &str) -> Result<(PathBuf, PathBuf)> {
        let csv_path = dir.join(format!("{stem}.csv"));
        let json_path = dir.join(format!("{stem}.json"));
        let mut out = std::io::BufWriter::new(std::fs::File::create(&csv_path)?);
        out.write_all(b"t,z,re,im\n")?;
        for iz in 0..self.grid_z.count() {
            let z = self.grid_z.point(iz).to_f64_lossy();
            for it in 0..self.grid_t.count() {
                let v = self.smooth(it, iz);
                writeln!(
                    out,
                    "{},{},{},{}",
                    fmt_float(self.grid_t.point(it).to_f64_lossy()),
                    fmt_float(z),
                    fmt_float(v.re.to_f64_lossy()),
                    fmt_float(v.im.to_f64_lossy())
                )?;
            }
        }
        out.flush()?;
        let text = serde_json::to_string_pretty(&self.sidecar())?;
        std::fs::write(&json_path, text + "\n")?;
        Ok((csv_path, json_path))
    }

    /// Metadata describing the dumped kernel.
    pub fn sidecar(&self) -> serde_json::Value {
        let grid = |g: &QuadratureGrid<T>| {
            serde_json::json!({
                "start": g.start().to_f64_lossy(),
                "step": g.step().to_f64_lossy(),
                "count": g.count(),
            })
        };
        let delta_z = self.delta_z.as_ref().map(|d| {
            d.iter()
                .map(|v| [v.re.to_f64_lossy(), v.im.to_f64_lossy()])
                .collect::<Vec<_>>()
        });
        serde_json::json!({
            "name": self.name.as_str(),
            "r": self.params.r().to_f64_lossy(),
            "weights": format!("{:?}", self.params.weights()).to_lowercase(),
            "strategy": self.provenance.as_str(),
            "grid_t": grid(&self.grid_t),
            "grid_z": grid(&self.grid_z),
            "delta_t_weight": [self.delta_t_weight.re.to_f64_lossy(), self.delta_t_weight.im.to_f64_lossy()],
            "delta_z_weight": delta_z,
        })
    }
}

/// Resolves `Auto` to a concrete strategy for the given grid corner.
pub fn resolve_strategy<T: Real>(
    strategy: KernelStrategy,
    params: &DetuningParams<T>,
    t_max: T,
    z_max: T,
) -> Result<Provenance> {
    let bound = cancellation_bound(params, t_max, z_max).to_f64_lossy();
    match strategy {
        KernelStrategy::Impulse => Ok(Provenance::Impulse),
        KernelStrategy::Analytic if bound > CANCELLATION_LIMIT => Err(Error::Precision { bound }),
        KernelStrategy::Analytic => Ok(Provenance::Analytic),
        KernelStrategy::Auto if bound > CANCELLATION_LIMIT => Ok(Provenance::Impulse),
        KernelStrategy::Auto => Ok(Provenance::Analytic),
    }
}

/// Samples the named kernel on `grid_t x grid_z` (both grids must start at 0).
pub fn build_kernel<T: Real>(
    name: KernelName,
    grid_t: &QuadratureGrid<T>,
    grid_z: &QuadratureGrid<T>,
    params: &DetuningParams<T>,
    strategy: KernelStrategy,
) -> Result<KernelField<T>> {
    check_origin(grid_t, grid_z)?;
    match resolve_strategy(strategy, params, grid_t.end(), grid_z.end())? {
        Provenance::Analytic => analytic_kernel(name, grid_t, grid_z, params),
        Provenance::Impulse => crate::dynamics::impulse_response(name, grid_t, grid_z, params),
    }
}

pub(crate) fn check_origin<T: Real>(grid_t: &QuadratureGrid<T>, grid_z: &QuadratureGrid<T>) -> Result<()> {
    if grid_t.start() != T::zero() || grid_z.start() != T::zero() {
        return Err(Error::GridMismatch("kernel grids must start at 0".into()));
    }
    Ok(())
}

/// Delta-in-z coefficient `2 F_k(t)` and its sign for the coherence kernels.
fn delta_z_factor(name: KernelName) -> Option<(TimeFactor, f64)> {
    match name {
        KernelName::Bb => Some((TimeFactor::F1, 2.0)),
        KernelName::Cb => Some((TimeFactor::F2, -2.0)),
        KernelName::Bc => Some((TimeFactor::F2, 2.0)),
        KernelName::Cc => Some((TimeFactor::F3, 2.0)),
        _ => None,
    }
}

fn analytic_kernel<T: Real>(
    name: KernelName,
    grid_t: &QuadratureGrid<T>,
    grid_z: &QuadratureGrid<T>,
    params: &DetuningParams<T>,
) -> Result<KernelField<T>> {
    let nt = grid_t.count();
    let nz = grid_z.count();
    let mut smooth = vec![Complex::new(T::zero(), T::zero()); nt * nz];
    let p = *params;
    smooth
        .par_chunks_mut(nt)
        .enumerate()
        .try_for_each_init(
            || ColumnWork::new(nt, grid_t.step()),
            |work, (iz, col)| work.fill(name, grid_t, grid_z.point(iz), &p, col),
        )?;
    let delta_z = delta_z_factor(name).map(|(which, sign)| {
        grid_t
            .points()
            .map(|t| time_factor(which, t, params).scale(T::lit(sign)))
            .collect()
    });
    let delta_t_weight = if name == KernelName::Aa {
        Complex::new(T::one(), T::zero())
    } else {
        Complex::new(T::zero(), T::zero())
    };
    Ok(KernelField {
        name,
        grid_t: *grid_t,
        grid_z: *grid_z,
        delta_t_weight,
        delta_z,
        smooth,
        provenance: Provenance::Analytic,
        params: *params,
    })
}

#[derive(Clone, Copy)]
enum Piece {
    H,
    F0,
    F1,
}

/// Per-thread scratch for one kernel column.
struct ColumnWork<T: Real> {
    conv: Convolver<T>,
}

impl<T: Real> ColumnWork<T> {
    fn new(nt: usize, step: T) -> Self {
        Self { conv: Convolver::new(nt, step) }
    }

    /// Direct branch samples `X(t; r)` at fixed `z`.
    fn direct(&self, piece: Piece, grid_t: &QuadratureGrid<T>, z: T, b: &Branch<T>) -> Result<Vec<Complex<T>>> {
        grid_t
            .points()
            .map(|t| match piece {
                Piece::H => b.h(t, z),
                Piece::F0 => b.f0(t, z),
                Piece::F1 => b.f1(t, z),
            })
            .collect()
    }

    /// Conjugated mirrored samples `Y*(t; -r)`.
    fn mirror(&self, piece: Piece, grid_t: &QuadratureGrid<T>, z: T, b: &Branch<T>) -> Result<Vec<Complex<T>>> {
        Ok(self.direct(piece, grid_t, z, b)?.into_iter().map(|v| v.conj()).collect())
    }

    fn convolve(&mut self, x: &[Complex<T>], y: &[Complex<T>]) -> Vec<Complex<T>> {
        let mut out = vec![Complex::new(T::zero(), T::zero()); x.len()];
        self.conv.convolve(x, y, &mut out);
        out
    }

    fn fill(
        &mut self,
        name: KernelName,
        grid_t: &QuadratureGrid<T>,
        z: T,
        params: &DetuningParams<T>,
        col: &mut [Complex<T>],
    ) -> Result<()> {
        let d = params.branch();
        let m = params.mirrored();
        let (mu, nu) = (params.mu(), params.nu());
        let half = T::lit(0.5);
        let quarter = T::lit(0.25);
        match name {
            KernelName::Aa => {
                let hr = self.direct(Piece::H, grid_t, z, &d)?;
                let hm = self.mirror(Piece::H, grid_t, z, &m)?;
                let hh = self.convolve(&hr, &hm);
                for k in 0..col.len() {
                    col[k] = hh[k] - hr[k] - hm[k];
                }
            }
            KernelName::Ab | KernelName::Ba => {
                let f0r = self.direct(Piece::F0, grid_t, z, &d)?;
                let f0m = self.mirror(Piece::F0, grid_t, z, &m)?;
                let g = self.convolve(&f0r, &f0m);
                col.copy_from_slice(&g);
            }
            KernelName::Ac | KernelName::Ca => {
                let f0r = self.direct(Piece::F0, grid_t, z, &d)?;
                let f0m = self.mirror(Piece::F0, grid_t, z, &m)?;
                let hr = self.direct(Piece::H, grid_t, z, &d)?;
                let hm = self.mirror(Piece::H, grid_t, z, &m)?;
                let a = self.convolve(&f0r, &hm);
                let b = self.convolve(&hr, &f0m);
                for k in 0..col.len() {
                    col[k] = (f0r[k] - a[k]).scale(mu * half) + (f0m[k] - b[k]).scale(nu * half);
                }
            }
            KernelName::Bb => {
                let f1r = self.direct(Piece::F1, grid_t, z, &d)?;
                let f1m = self.mirror(Piece::F1, grid_t, z, &m)?;
                let g = self.convolve(&f1r, &f1m);
                col.copy_from_slice(&g);
            }
            KernelName::Cb | KernelName::Bc => {
                let f1r = self.direct(Piece::F1, grid_t, z, &d)?;
                let f1m = self.mirror(Piece::F1, grid_t, z, &m)?;
                let f0r = self.direct(Piece::F0, grid_t, z, &d)?;
                let f0m = self.mirror(Piece::F0, grid_t, z, &m)?;
                let a = self.convolve(&f1r, &f0m);
                let b = self.convolve(&f0r, &f1m);
                let sign = if name == KernelName::Cb { T::one() } else { -T::one() };
                for k in 0..col.len() {
                    col[k] = (a[k].scale(mu * half) + b[k].scale(nu * half)).scale(sign);
                }
            }
            KernelName::Cc => {
                let f1r = self.direct(Piece::F1, grid_t, z, &d)?;
                let f1m = self.mirror(Piece::F1, grid_t, z, &m)?;
                let f0r = self.direct(Piece::F0, grid_t, z, &d)?;
                let f0m = self.mirror(Piece::F0, grid_t, z, &m)?;
                let hr = self.direct(Piece::H, grid_t, z, &d)?;
                let hm = self.mirror(Piece::H, grid_t, z, &m)?;
                let a = self.convolve(&f1r, &hm);
                let b = self.convolve(&hr, &f1m);
                let c = self.convolve(&f0r, &f0m);
                for k in 0..col.len() {
                    col[k] = -(f1r[k] - a[k]).scale(mu * mu * quarter)
                        - (f1m[k] - b[k]).scale(nu * nu * quarter)
                        - c[k].scale(mu * nu * half);
                }
            }
        }
        Ok(())
    }
}
