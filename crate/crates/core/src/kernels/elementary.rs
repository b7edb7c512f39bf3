// Copyright 2026 The lambdamem Authors
// SPDX-License-Identifier: Apache-2.0

//! Bessel-type building blocks `h`, `f0`, `f1` and the time factors `F1..F3`.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{cis, Real};
use crate::special_math::{j0_of_square, j1_ratio_of_square, MathError};

/// Which set of coupling weights multiplies `z t` inside the Bessel arguments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum CouplingWeights {
    /// Pole residues `1 +- r / sqrt(1 + r^2)`; exact solutions of the rescaled equations.
    #[default]
    Residue,
    /// The linearized weights `1 +- r`; equal to `Residue` at `r = 0` only.
    Linear,
}

/// Dimensionless detuning `r` and derived constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetuningParams<T> {
    r: T,
    omega_bar: T,
    mu: T,
    nu: T,
    weights: CouplingWeights,
}

impl<T: Real> DetuningParams<T> {
    pub fn new(r: T) -> Result<Self> {
        Self::with_weights(r, CouplingWeights::Residue)
    }

    pub fn with_weights(r: T, weights: CouplingWeights) -> Result<Self> {
        if !r.is_finite() || r < T::zero() {
            return Err(Error::Negative { what: "detuning r", value: r.to_f64_lossy() });
        }
        let omega_bar = (T::one() + r * r).sqrt();
        let (mu, nu) = match weights {
            CouplingWeights::Residue => (T::one() + r / omega_bar, T::one() - r / omega_bar),
            CouplingWeights::Linear => (T::one() + r, T::one() - r),
        };
        Ok(Self { r, omega_bar, mu, nu, weights })
    }

    /// Same weights at another detuning.
    pub fn with_r(&self, r: T) -> Result<Self> {
        Self::with_weights(r, self.weights)
    }

    pub fn r(&self) -> T {
        self.r
    }

    pub fn omega_bar(&self) -> T {
        self.omega_bar
    }

    pub fn mu(&self) -> T {
        self.mu
    }

    pub fn nu(&self) -> T {
        self.nu
    }

    pub fn weights(&self) -> CouplingWeights {
        self.weights
    }

    pub(crate) fn branch(&self) -> Branch<T> {
        Branch { rate: self.omega_bar + self.r, weight: self.mu }
    }

    /// The `r -> -r` branch used as the second convolution factor.
    pub(crate) fn mirrored(&self) -> Branch<T> {
        Branch { rate: self.omega_bar - self.r, weight: self.nu }
    }
}

/// Phase rate `omega_bar + r` and Bessel weight of one branch.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Branch<T> {
    pub rate: T,
    pub weight: T,
}

fn lift(e: MathError) -> Error {
    match e {
        MathError::Range(x) => Error::KernelOverflow { x },
        other => Error::Math(other),
    }
}

impl<T: Real> Branch<T> {
    #[inline]
    pub(crate) fn h(&self, t: T, z: T) -> Result<Complex<T>> {
        let ratio = j1_ratio_of_square(self.weight * z * t).map_err(lift)?;
        Ok(cis(-self.rate * t).scale(self.weight * z / T::lit(2.0) * ratio))
    }

    #[inline]
    pub(crate) fn f0(&self, t: T, z: T) -> Result<Complex<T>> {
        let j = j0_of_square(self.weight * z * t).map_err(lift)?;
        Ok(cis(-self.rate * t).scale(j))
    }

    #[inline]
    pub(crate) fn f1(&self, t: T, z: T) -> Result<Complex<T>> {
        let ratio = j1_ratio_of_square(self.weight * z * t).map_err(lift)?;
        Ok(cis(-self.rate * t).scale(T::lit(2.0) * t * ratio))
    }
}

fn check_tz<T: Real>(t: T, z: T) -> Result<()> {
    if !t.is_finite() || t < T::zero() {
        return Err(Error::Negative { what: "time t", value: t.to_f64_lossy() });
    }
    if !z.is_finite() || z < T::zero() {
        return Err(Error::Negative { what: "length z", value: z.to_f64_lossy() });
    }
    Ok(())
}

/// Smooth part `h` of `f = delta(t) - h`.
///
/// `h = exp(-i(w+r)t) (mu z / 2) J1(s)/s` with `s = sqrt(mu z t)`, so `h(0, z) = mu z / 4`.
pub fn eval_f_smooth<T: Real>(t: T, z: T, params: &DetuningParams<T>) -> Result<Complex<T>> {
    check_tz(t, z)?;
    params.branch().h(t, z)
}

/// `f0 = exp(-i(w+r)t) J0(sqrt(mu z t))`.
pub fn eval_f0<T: Real>(t: T, z: T, params: &DetuningParams<T>) -> Result<Complex<T>> {
    check_tz(t, z)?;
    params.branch().f0(t, z)
}

/// `f1 = exp(-i(w+r)t) sqrt(4t/(mu z)) J1(sqrt(mu z t))`, with limit `t` as `z -> 0`.
pub fn eval_f1<T: Real>(t: T, z: T, params: &DetuningParams<T>) -> Result<Complex<T>> {
    check_tz(t, z)?;
    params.branch().f1(t, z)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TimeFactor {
    F1,
    F2,
    F3,
}

/// Time factors multiplying the `delta(z)` parts of the coherence kernels.
pub fn eval_time_factor<T: Real>(which: TimeFactor, t: T, params: &DetuningParams<T>) -> Result<Complex<T>> {
    if !t.is_finite() || t < T::zero() {
        return Err(Error::Negative { what: "time t", value: t.to_f64_lossy() });
    }
    Ok(time_factor(which, t, params))
}

pub(crate) fn time_factor<T: Real>(which: TimeFactor, t: T, params: &DetuningParams<T>) -> Complex<T> {
    let w = params.omega_bar();
    let r = params.r();
    let (s, c) = (w * t).sin_cos();
    let phase = cis(-r * t);
    let v = match which {
        TimeFactor::F1 => Complex::new(c, r / w * s),
        TimeFactor::F2 => Complex::new(s / w, T::zero()),
        TimeFactor::F3 => Complex::new(c, -r / w * s),
    };
    v * phase
}

/// Estimated decimal digits lost to cancellation at the grid corner.
///
/// Nonzero only when the mirrored weight is negative, which happens for
/// `r > 1` under [`CouplingWeights::Linear`].
pub fn cancellation_bound<T: Real>(params: &DetuningParams<T>, t_max: T, z_max: T) -> T {
    let growth = (-params.nu()).max(T::zero());
    (growth * z_max.max(T::zero()) * t_max.max(T::zero())).sqrt() / T::LN_10()
}
