// Copyright 2026 The lambdamem Authors
// SPDX-License-Identifier: Apache-2.0

//! Adiabatic limit `dC/dt = 0`:
//!
//! ```text
//! dA/dz = -(A + B) / (4ir),   dB/dt = -(A + B) / (2ir)
//! ```
//!
//! `A` is advanced in `z` by Crank-Nicolson, which keeps
//! `2 d|A|^2/dz + d|B|^2/dt = 0` exactly in the `z` direction.

use num_complex::Complex;

use super::stepper::Rk4;
use super::{Direction, FieldHistory, Recording, StorageState};
use crate::config::SimulationConfig;
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::special_math::{energy, QuadratureGrid};

/// Raman-limit write stage. Requires `r > 0`.
pub fn integrate_raman<T, F>(
    config: &SimulationConfig<T>,
    input: F,
    recording: Recording,
) -> Result<(FieldHistory<T>, StorageState<T>)>
where
    T: Real,
    F: Fn(T) -> Complex<T>,
{
    config.validate()?;
    let grid_z = config.grid_z()?;
    let init = vec![Complex::new(T::zero(), T::zero()); grid_z.count()];
    run(&config.write_grid()?, &grid_z, config.detuning.r(), input, init, recording)
}

/// Raman-limit read stage from a stored `B` profile (mirrored for backward).
pub fn integrate_raman_read<T: Real>(
    state: &StorageState<T>,
    config: &SimulationConfig<T>,
    direction: Direction,
    recording: Recording,
) -> Result<(FieldHistory<T>, StorageState<T>)> {
    config.validate()?;
    let grid_z = config.grid_z()?;
    if state.grid_z != grid_z {
        return Err(Error::GridMismatch("stored profile and read grid differ in z".into()));
    }
    let mut init = state.b.clone();
    if direction == Direction::Backward {
        init.reverse();
    }
    let zero = |_t: T| Complex::new(T::zero(), T::zero());
    run(&config.read_grid()?, &grid_z, config.detuning.r(), zero, init, recording)
}

fn field<T: Real>(a_in: Complex<T>, b: &[Complex<T>], k_half: Complex<T>, a: &mut [Complex<T>]) {
    let one = Complex::new(T::one(), T::zero());
    let lead = (one - k_half) / (one + k_half);
    let src = k_half / (one + k_half);
    a[0] = a_in;
    for j in 1..b.len() {
        a[j] = a[j - 1] * lead - src * (b[j - 1] + b[j]);
    }
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
    if !(r > T::zero()) {
        return Err(Error::RamanAtResonance);
    }
    let nz = grid_z.count();
    let dz = grid_z.step();
    // k dz / 2 with k = 1 / (4ir)
    let k_half = Complex::new(T::zero(), -T::one() / (T::lit(4.0) * r)).scale(dz / T::lit(2.0));
    let rate_coef = Complex::new(T::zero(), T::one() / (T::lit(2.0) * r));
    let zeros = vec![Complex::new(T::zero(), T::zero()); nz];
    let mut history = FieldHistory::new(*grid_t, *grid_z, recording);
    let mut a = zeros.clone();
    let mut y = init;
    let mut rk = Rk4::new(nz);

    let mut available = energy(&y, dz) / T::lit(2.0);
    let mut last_in = input(T::zero()).norm_sqr();
    field(input(T::zero()), &y, k_half, &mut a);
    history.record(0, &a, &y, &zeros);
    let h = grid_t.step();
    for it in 1..grid_t.count() {
        rk.step(grid_t.point(it - 1), h, &mut y, |tt, b, db| {
            field(input(tt), b, k_half, &mut a);
            for j in 0..nz {
                db[j] = rate_coef * (a[j] + b[j]);
            }
        });
        let tn = grid_t.point(it);
        let a_in = input(tn);
        available = available + (last_in + a_in.norm_sqr()) * h / T::lit(2.0);
        last_in = a_in.norm_sqr();
        let stored = energy(&y, dz) / T::lit(2.0);
        if !stored.is_finite() || stored > available * T::lit(1.05) + T::epsilon() * T::lit(1e3) {
            return Err(Error::Unstable { t: tn.to_f64_lossy() });
        }
        field(a_in, &y, k_half, &mut a);
        history.record(it, &a, &y, &zeros);
    }
    let state = StorageState { grid_z: *grid_z, b: y, c: zeros, t: grid_t.end() };
    Ok((history, state))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{global_balance, input_energy, unit_input};

    #[test]
    fn resonance_is_rejected() {
        let c = SimulationConfig::new(1.0_f64, 1.0, 0.0).unwrap().with_grid(16, 8).unwrap();
        assert!(matches!(integrate_raman(&c, unit_input, Recording::Output), Err(Error::RamanAtResonance)));
    }

    #[test]
    fn zero_input_gives_zero() {
        let c = SimulationConfig::new(2.0_f64, 5.0, 2.0).unwrap().with_grid(64, 32).unwrap();
        let zero = |_t: f64| Complex::new(0.0, 0.0);
        let (h, s) = integrate_raman(&c, zero, Recording::Field).unwrap();
        assert!(h.field().unwrap().iter().all(|v| v.norm() == 0.0));
        assert!(s.b.iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn raman_conserves_photons() {
        let c = SimulationConfig::new(12.0_f64, 50.0, 2.0).unwrap().with_grid(1024, 512).unwrap();
        let (h, s) = integrate_raman(&c, unit_input, Recording::Output).unwrap();
        let e_in = input_energy(&c.write_grid().unwrap(), unit_input);
        let bal = global_balance(&h, &s, e_in).unwrap();
        assert!(bal.residual < 1e-4, "{bal:?}");
        assert_eq!(bal.stored_c, 0.0);
    }
}
