// Copyright 2026 The lambdamem Authors
// SPDX-License-Identifier: Apache-2.0

//! Method-of-lines marcher: RK4 in `t` for the coherences, trapezoid
//! accumulation in `z` for the field.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::special_math::QuadratureGrid;

/// Classical fourth-order Runge-Kutta with reusable buffers.
pub(crate) struct Rk4<T> {
    k1: Vec<Complex<T>>,
    k2: Vec<Complex<T>>,
    k3: Vec<Complex<T>>,
    k4: Vec<Complex<T>>,
    tmp: Vec<Complex<T>>,
}

impl<T: Real> Rk4<T> {
    pub(crate) fn new(len: usize) -> Self {
        let z = vec![Complex::new(T::zero(), T::zero()); len];
        Self { k1: z.clone(), k2: z.clone(), k3: z.clone(), k4: z.clone(), tmp: z }
    }

    pub(crate) fn step<F>(&mut self, t: T, h: T, y: &mut [Complex<T>], mut rate: F)
    where
        F: FnMut(T, &[Complex<T>], &mut [Complex<T>]),
    {
        let half = h / T::lit(2.0);
        rate(t, y, &mut self.k1);
        for ((o, y), k) in self.tmp.iter_mut().zip(y.iter()).zip(&self.k1) {
            *o = y + k.scale(half);
        }
        rate(t + half, &self.tmp, &mut self.k2);
        for ((o, y), k) in self.tmp.iter_mut().zip(y.iter()).zip(&self.k2) {
            *o = y + k.scale(half);
        }
        rate(t + half, &self.tmp, &mut self.k3);
        for ((o, y), k) in self.tmp.iter_mut().zip(y.iter()).zip(&self.k3) {
            *o = y + k.scale(h);
        }
        rate(t + h, &self.tmp, &mut self.k4);
        let sixth = h / T::lit(6.0);
        let two = T::lit(2.0);
        for i in 0..y.len() {
            y[i] = y[i] + (self.k1[i] + (self.k2[i] + self.k3[i]).scale(two) + self.k4[i]).scale(sixth);
        }
    }
}

/// `A(z) = a_in - (1/2) int_0^z C`.
#[inline]
pub(crate) fn field_from<T: Real>(a_in: Complex<T>, c: &[Complex<T>], dz: T, a: &mut [Complex<T>]) {
    let quarter = dz / T::lit(4.0);
    let mut acc = a_in;
    a[0] = acc;
    for j in 1..c.len() {
        acc = acc - (c[j - 1] + c[j]).scale(quarter);
        a[j] = acc;
    }
}

/// Layout of the marched state vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Layout {
    /// `[B | C]`
    Plain,
    /// `[B | C | dB/dz | dC/dz]`
    Tangent,
}

impl Layout {
    pub(crate) fn blocks(self) -> usize {
        match self {
            Layout::Plain => 2,
            Layout::Tangent => 4,
        }
    }
}

/// Marches the rescaled equations over `grid_t`, calling `observe(it, state, a)`
/// at every grid time including `t = 0`. Returns the final state.
pub(crate) fn march<T, I, O>(
    grid_t: &QuadratureGrid<T>,
    grid_z: &QuadratureGrid<T>,
    r: T,
    layout: Layout,
    input: I,
    init: Vec<Complex<T>>,
    mut observe: O,
) -> Result<Vec<Complex<T>>>
where
    T: Real,
    I: Fn(T) -> Complex<T>,
    O: FnMut(usize, &[Complex<T>], &[Complex<T>]),
{
    let nz = grid_z.count();
    let dz = grid_z.step();
    debug_assert_eq!(init.len(), layout.blocks() * nz);
    let mut y = init;
    let mut a = vec![Complex::new(T::zero(), T::zero()); nz];
    let mut rk = Rk4::new(y.len());
    let two_ir = Complex::new(T::zero(), T::lit(2.0) * r);
    let half = T::lit(0.5);

    let mut guard = EnergyGuard::new(&y[..2 * nz], dz, input(T::zero()));
    field_from(input(T::zero()), &y[nz..2 * nz], dz, &mut a);
    observe(0, &y, &a);

    let h = grid_t.step();
    for it in 1..grid_t.count() {
        let t = grid_t.point(it - 1);
        rk.step(t, h, &mut y, |tt, s, ds| {
            let (b, rest) = s.split_at(nz);
            let c = &rest[..nz];
            field_from(input(tt), c, dz, &mut a);
            let (db, drest) = ds.split_at_mut(nz);
            let dc = &mut drest[..nz];
            for j in 0..nz {
                db[j] = -c[j];
                dc[j] = a[j] + b[j] - two_ir * c[j];
            }
            if layout == Layout::Tangent {
                let bz = &rest[nz..2 * nz];
                let cz = &rest[2 * nz..3 * nz];
                let (dbz, dcz) = drest[nz..3 * nz].split_at_mut(nz);
                for j in 0..nz {
                    dbz[j] = -cz[j];
                    dcz[j] = bz[j] - two_ir * cz[j] - c[j].scale(half);
                }
            }
        });
        let tn = grid_t.point(it);
        let a_in = input(tn);
        guard.check(&y[..2 * nz], a_in, h, tn)?;
        field_from(a_in, &y[nz..2 * nz], dz, &mut a);
        observe(it, &y, &a);
    }
    Ok(y)
}

/// Flags blow-up: stored energy may never exceed what was injected.
struct EnergyGuard<T> {
    dz: T,
    available: T,
    last_in: T,
}

const GROWTH_SLACK: f64 = 1.05;

impl<T: Real> EnergyGuard<T> {
    fn new(bc: &[Complex<T>], dz: T, a0: Complex<T>) -> Self {
        Self { dz, available: stored_energy(bc, dz), last_in: a0.norm_sqr() }
    }

    fn check(&mut self, bc: &[Complex<T>], a_in: Complex<T>, h: T, t: T) -> Result<()> {
        let now_in = a_in.norm_sqr();
        self.available = self.available + (self.last_in + now_in) * h / T::lit(2.0);
        self.last_in = now_in;
        let e = stored_energy(bc, self.dz);
        let tiny = T::epsilon() * T::lit(1e3);
        if !e.is_finite() || e > self.available * T::lit(GROWTH_SLACK) + tiny {
            return Err(Error::Unstable { t: t.to_f64_lossy() });
        }
        Ok(())
    }
}

/// `(1/2) int (|B|^2 + |C|^2) dz` over a `[B | C]` slice.
pub(crate) fn stored_energy<T: Real>(bc: &[Complex<T>], dz: T) -> T {
    let nz = bc.len() / 2;
    let (b, c) = bc.split_at(nz);
    let eb = crate::special_math::energy(b, dz);
    let ec = crate::special_math::energy(c, dz);
    (eb + ec) / T::lit(2.0)
}
