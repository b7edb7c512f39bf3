// Copyright 2026 The lambdamem Authors
// SPDX-License-Identifier: Apache-2.0

//! Bessel functions of orders 0 and 1 (ordinary and modified), uniform grids
//! and trapezoidal quadrature.
//!
//! `J0`/`J1` use three regimes: the power series for `|x| <= 12`, Miller's
//! backward recurrence for `12 < |x| <= 25`, and the Hankel asymptotic
//! expansion beyond. Each regime keeps the absolute error near `1e-14` in
//! `f64`. `I0`/`I1` use the (cancellation-free) power series up to `x = 30` and
//! the large-argument expansion beyond, with the exponential factor split so
//! that overflow is detected rather than silently producing `inf`.

use num_complex::Complex;
use thiserror::Error;

use crate::scalar::Real;

const SERIES_LIMIT: f64 = 12.0;
const ASYMPTOTIC_LIMIT: f64 = 25.0;
const MODIFIED_SERIES_LIMIT: f64 = 30.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MathError {
    #[error("argument {0} is not finite")]
    NonFinite(f64),
    #[error("Bessel order {0} is not supported (only 0 and 1)")]
    UnsupportedOrder(u32),
    #[error("argument {0} is outside the function domain")]
    Domain(f64),
    #[error("result overflows the scalar range at argument {0}")]
    Range(f64),
    #[error("quadrature needs at least 2 samples, got {0}")]
    TooFewSamples(usize),
    #[error("grid step must be positive and finite, got {0}")]
    BadStep(f64),
}

/// Uniform sampling `x_k = start + k * step`, `k = 0..count`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureGrid<T> {
    start: T,
    step: T,
    count: usize,
}

impl<T: Real> QuadratureGrid<T> {
    pub fn new(start: T, step: T, count: usize) -> Result<Self, MathError> {
        if !(step > T::zero()) || !step.is_finite() {
            return Err(MathError::BadStep(step.to_f64_lossy()));
        }
        if !start.is_finite() {
            return Err(MathError::NonFinite(start.to_f64_lossy()));
        }
        if count < 2 {
            return Err(MathError::TooFewSamples(count));
        }
        Ok(Self { start, step, count })
    }

    /// Grid over `[start, end]` split into `intervals` equal cells.
    pub fn spanning(start: T, end: T, intervals: usize) -> Result<Self, MathError> {
        if intervals == 0 {
            return Err(MathError::TooFewSamples(1));
        }
        let step = (end - start) / T::from_count(intervals);
        Self::new(start, step, intervals + 1)
    }

    pub fn start(&self) -> T {
        self.start
    }

    pub fn step(&self) -> T {
        self.step
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn intervals(&self) -> usize {
        self.count - 1
    }

    pub fn end(&self) -> T {
        self.point(self.count - 1)
    }

    #[inline]
    pub fn point(&self, k: usize) -> T {
        self.start + T::from_count(k) * self.step
    }

    pub fn points(&self) -> impl Iterator<Item = T> + '_ {
        (0..self.count).map(move |k| self.point(k))
    }

    /// Same span with twice as many intervals.
    pub fn refined(&self) -> Self {
        Self {
            start: self.start,
            step: self.step / T::lit(2.0),
            count: 2 * self.count - 1,
        }
    }
}

/// Bessel function of the first kind, `J_order(x)`, for `order` in {0, 1}.
pub fn bessel_j<T: Real>(order: u32, x: T) -> Result<T, MathError> {
    if !x.is_finite() {
        return Err(MathError::NonFinite(x.to_f64_lossy()));
    }
    match order {
        0 => Ok(j0(x)),
        1 => Ok(j1(x)),
        n => Err(MathError::UnsupportedOrder(n)),
    }
}

/// Modified Bessel function of the first kind, `I_order(x)`, for `x >= 0`.
pub fn bessel_i<T: Real>(order: u32, x: T) -> Result<T, MathError> {
    if !x.is_finite() {
        return Err(MathError::NonFinite(x.to_f64_lossy()));
    }
    if x < T::zero() {
        return Err(MathError::Domain(x.to_f64_lossy()));
    }
    match order {
        0 => i0(x),
        1 => i1(x),
        n => Err(MathError::UnsupportedOrder(n)),
    }
}

/// `J0(x)` for finite `x`.
pub fn j0<T: Real>(x: T) -> T {
    let ax = x.abs();
    if ax <= T::lit(SERIES_LIMIT) {
        j_series(0, ax)
    } else if ax <= T::lit(ASYMPTOTIC_LIMIT) {
        miller(ax).0
    } else {
        hankel(0, ax)
    }
}

/// `J1(x)` for finite `x`.
pub fn j1<T: Real>(x: T) -> T {
    let ax = x.abs();
    let v = if ax <= T::lit(SERIES_LIMIT) {
        j_series(1, ax)
    } else if ax <= T::lit(ASYMPTOTIC_LIMIT) {
        miller(ax).1
    } else {
        hankel(1, ax)
    };
    if x < T::zero() {
        -v
    } else {
        v
    }
}

fn i0<T: Real>(x: T) -> Result<T, MathError> {
    if x <= T::lit(MODIFIED_SERIES_LIMIT) {
        Ok(i_series(0, x))
    } else {
        i_asymptotic(0, x)
    }
}

fn i1<T: Real>(x: T) -> Result<T, MathError> {
    if x <= T::lit(MODIFIED_SERIES_LIMIT) {
        Ok(i_series(1, x))
    } else {
        i_asymptotic(1, x)
    }
}

/// `sum_k (-1)^k (x/2)^(2k+n) / (k! (k+n)!)`
fn j_series<T: Real>(n: u32, x: T) -> T {
    let half = x / T::lit(2.0);
    let q = -half * half;
    let mut term = if n == 0 { T::one() } else { half };
    let mut sum = term;
    let tiny = T::epsilon() * T::lit(1e-3);
    for k in 1..200u32 {
        let kk = T::from_count(k as usize);
        term = term * q / (kk * (kk + T::from_count(n as usize)));
        sum = sum + term;
        if term.abs() < tiny {
            break;
        }
    }
    sum
}

fn i_series<T: Real>(n: u32, x: T) -> T {
    let half = x / T::lit(2.0);
    let q = half * half;
    let mut term = if n == 0 { T::one() } else { half };
    let mut sum = term;
    for k in 1..2000u32 {
        let kk = T::from_count(k as usize);
        term = term * q / (kk * (kk + T::from_count(n as usize)));
        sum = sum + term;
        if term <= sum * T::epsilon() * T::lit(0.1) {
            break;
        }
    }
    sum
}

/// Miller's backward recurrence returning `(J0(x), J1(x))` for `x > 0`.
fn miller<T: Real>(x: T) -> (T, T) {
    let start = 2 * ((x.to_f64_lossy() as usize + 40) / 2);
    let two_over_x = T::lit(2.0) / x;
    let big = T::lit(1e10);
    let mut next = T::zero();
    let mut cur = T::lit(1e-30);
    let mut norm = T::zero();
    let mut j1v = T::zero();
    let mut j0v = T::zero();
    for k in (1..=start).rev() {
        // cur = J_k, compute J_{k-1}
        let prev = T::from_count(k) * two_over_x * cur - next;
        next = cur;
        cur = prev;
        let km1 = k - 1;
        if km1 == 1 {
            j1v = cur;
        }
        if km1 == 0 {
            j0v = cur;
            norm = norm + cur;
        } else if km1 % 2 == 0 {
            norm = norm + T::lit(2.0) * cur;
        }
        if cur.abs() > big {
            cur = cur / big;
            next = next / big;
            norm = norm / big;
            j1v = j1v / big;
        }
    }
    (j0v / norm, j1v / norm)
}

/// Hankel expansion for `x > 25`.
fn hankel<T: Real>(n: u32, x: T) -> T {
    let mu = T::lit(4.0 * (n * n) as f64);
    let eight_x = T::lit(8.0) * x;
    // a_k = prod_{j=1..k} (mu - (2j-1)^2) / (k! (8x)^k)
    let mut p = T::one();
    let mut q = T::zero();
    let mut a = T::one();
    let mut last = T::infinity();
    for k in 1..60u32 {
        let odd = T::from_count((2 * k - 1) as usize);
        let next = a * (mu - odd * odd) / (T::from_count(k as usize) * eight_x);
        if next.abs() >= last || next.abs() < T::epsilon() * T::lit(1e-3) {
            break;
        }
        last = next.abs();
        a = next;
        // k odd -> Q, k even -> P; signs alternate within each series
        match k % 4 {
            1 => q = q + a,
            2 => p = p - a,
            3 => q = q - a,
            _ => p = p + a,
        }
    }
    let (s, c) = x.sin_cos();
    let r2 = T::FRAC_1_SQRT_2();
    let (cos_chi, sin_chi) = if n == 0 {
        ((c + s) * r2, (s - c) * r2)
    } else {
        ((s - c) * r2, -(s + c) * r2)
    };
    (T::lit(2.0) / (T::PI() * x)).sqrt() * (p * cos_chi - q * sin_chi)
}

fn i_asymptotic<T: Real>(n: u32, x: T) -> Result<T, MathError> {
    let mu = T::lit(4.0 * (n * n) as f64);
    let eight_x = T::lit(8.0) * x;
    let mut sum = T::one();
    let mut a = T::one();
    let mut last = T::infinity();
    for k in 1..60u32 {
        let odd = T::from_count((2 * k - 1) as usize);
        let next = -a * (mu - odd * odd) / (T::from_count(k as usize) * eight_x);
        if next.abs() >= last || next.abs() < T::epsilon() * T::lit(1e-3) {
            break;
        }
        last = next.abs();
        a = next;
        sum = sum + a;
    }
    let half = (x / T::lit(2.0)).exp();
    let v = half * (half * sum / (T::lit(2.0) * T::PI() * x).sqrt());
    if v.is_finite() {
        Ok(v)
    } else {
        Err(MathError::Range(x.to_f64_lossy()))
    }
}

/// `J0(sqrt(q))` continued to `q < 0` as `I0(sqrt(-q))`.
pub(crate) fn j0_of_square<T: Real>(q: T) -> Result<T, MathError> {
    if q >= T::zero() {
        Ok(j0(q.sqrt()))
    } else {
        i0((-q).sqrt())
    }
}

/// `J1(sqrt(q)) / sqrt(q)` continued to `q < 0` as `I1(y) / y` with `y = sqrt(-q)`;
/// equals 1/2 at `q = 0`.
pub(crate) fn j1_ratio_of_square<T: Real>(q: T) -> Result<T, MathError> {
    // small |q|: the series in q avoids the 0/0 form
    if q.abs() <= T::one() {
        let mut term = T::lit(0.5);
        let mut sum = term;
        let step = -q / T::lit(4.0);
        for k in 1..40u32 {
            let kk = T::from_count(k as usize);
            term = term * step / (kk * (kk + T::one()));
            sum = sum + term;
            if term.abs() < T::epsilon() * T::lit(1e-3) {
                break;
            }
        }
        return Ok(sum);
    }
    if q > T::zero() {
        let s = q.sqrt();
        Ok(j1(s) / s)
    } else {
        let y = (-q).sqrt();
        Ok(i1(y)? / y)
    }
}

/// Composite trapezoidal rule over uniformly spaced samples.
pub fn trapezoid<T: Real>(samples: &[Complex<T>], step: T) -> Result<Complex<T>, MathError> {
    check_quadrature(samples.len(), step)?;
    Ok(trapezoid_unchecked(samples, step))
}

/// Real-valued variant of [`trapezoid`].
pub fn trapezoid_real<T: Real>(samples: &[T], step: T) -> Result<T, MathError> {
    check_quadrature(samples.len(), step)?;
    let n = samples.len();
    let inner = samples[1..n - 1].iter().fold(T::zero(), |acc, &v| acc + v);
    Ok(step * (inner + (samples[0] + samples[n - 1]) / T::lit(2.0)))
}

fn check_quadrature<T: Real>(len: usize, step: T) -> Result<(), MathError> {
    if len < 2 {
        return Err(MathError::TooFewSamples(len));
    }
    if !(step > T::zero()) || !step.is_finite() {
        return Err(MathError::BadStep(step.to_f64_lossy()));
    }
    Ok(())
}

pub(crate) fn trapezoid_unchecked<T: Real>(samples: &[Complex<T>], step: T) -> Complex<T> {
    let n = samples.len();
    let inner = samples[1..n - 1]
        .iter()
        .fold(Complex::new(T::zero(), T::zero()), |acc, &v| acc + v);
    (inner + (samples[0] + samples[n - 1]).unscale(T::lit(2.0))).scale(step)
}

/// Running trapezoid integral; `out[0] = 0`.
pub(crate) fn cumulative_trapezoid<T: Real>(samples: &[Complex<T>], step: T, out: &mut [Complex<T>]) {
    let half = step / T::lit(2.0);
    let mut acc = Complex::new(T::zero(), T::zero());
    out[0] = acc;
    for k in 1..samples.len() {
        acc = acc + (samples[k - 1] + samples[k]).scale(half);
        out[k] = acc;
    }
}

/// Sum of `|samples|^2` by the trapezoid rule.
pub(crate) fn energy<T: Real>(samples: &[Complex<T>], step: T) -> T {
    let n = samples.len();
    if n < 2 {
        return T::zero();
    }
    let inner = samples[1..n - 1].iter().fold(T::zero(), |acc, v| acc + v.norm_sqr());
    step * (inner + (samples[0].norm_sqr() + samples[n - 1].norm_sqr()) / T::lit(2.0))
}

/// Sum of `|samples|^2` by composite Simpson, closing an odd interval count
/// with the 3/8 rule. Falls back to the trapezoid below four samples.
pub(crate) fn simpson_energy<T: Real>(samples: &[Complex<T>], step: T) -> T {
    let n = samples.len();
    if n < 4 {
        return energy(samples, step);
    }
    let f = |k: usize| samples[k].norm_sqr();
    // even number of intervals covered by Simpson, the rest (0 or 3) by 3/8
    let m = if (n - 1).is_multiple_of(2) { n - 1 } else { n - 4 };
    let mut total = T::zero();
    if m > 0 {
        let mut acc = f(0) + f(m);
        for k in 1..m {
            acc = acc + f(k) * if k % 2 == 1 { T::lit(4.0) } else { T::lit(2.0) };
        }
        total = acc * step / T::lit(3.0);
    }
    if m < n - 1 {
        let tail = f(m) + (f(m + 1) + f(m + 2)) * T::lit(3.0) + f(m + 3);
        total = total + tail * step * T::lit(3.0) / T::lit(8.0);
    }
    total
}
