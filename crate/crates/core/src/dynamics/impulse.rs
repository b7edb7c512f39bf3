// Copyright 2026 The lambdamem Authors
// SPDX-License-Identifier: Apache-2.0

//! Kernels extracted from integrated responses.
//!
//! A unit step at the entrance and uniform unit initial coherences are
//! integrated instead of grid-cell spikes; the kernels are then exact
//! derivatives of those responses:
//!
//! * step input: `G_ab = C`, `G_ac = dC/dt`, smooth `G_aa = dA/dt`;
//! * uniform `B(0) = 1`: `G_ba = C`, `G_bb = 2 dB/dz`, `G_bc = 2 dC/dz`;
//! * uniform `C(0) = 1`: `G_ca = C`, `G_cb = 2 dB/dz`, `G_cc = 2 dC/dz`.
//!
//! The `z`-derivatives are marched alongside as a tangent system, and the
//! `delta(z)` weights are twice the entrance values of `B` and `C`.

use num_complex::Complex;

use super::stepper::{march, Layout};
use crate::error::Result;
use crate::kernels::{check_origin, DetuningParams, KernelField, KernelName, Provenance};
use crate::scalar::Real;
use crate::special_math::{cumulative_trapezoid, QuadratureGrid};

/// Kernel `name` on `grid_t x grid_z` from the integrated impulse responses.
pub fn impulse_response<T: Real>(
    name: KernelName,
    grid_t: &QuadratureGrid<T>,
    grid_z: &QuadratureGrid<T>,
    params: &DetuningParams<T>,
) -> Result<KernelField<T>> {
    check_origin(grid_t, grid_z)?;
    let nt = grid_t.count();
    let nz = grid_z.count();
    let zero = Complex::new(T::zero(), T::zero());
    let one = Complex::new(T::one(), T::zero());
    let two = T::lit(2.0);
    let two_ir = Complex::new(T::zero(), two * params.r());
    let mut smooth = vec![zero; nt * nz];
    let mut delta_z: Option<Vec<Complex<T>>> = None;

    match name {
        KernelName::Aa | KernelName::Ab | KernelName::Ac => {
            let mut rate = vec![zero; nz];
            let mut acc = vec![zero; nz];
            let half = T::lit(0.5);
            march(grid_t, grid_z, params.r(), Layout::Plain, |_| one, vec![zero; 2 * nz], |it, s, a| {
                let (b, c) = s.split_at(nz);
                for j in 0..nz {
                    rate[j] = a[j] + b[j] - two_ir * c[j];
                }
                match name {
                    KernelName::Ab => {
                        for j in 0..nz {
                            smooth[j * nt + it] = c[j];
                        }
                    }
                    KernelName::Ac => {
                        for j in 0..nz {
                            smooth[j * nt + it] = rate[j];
                        }
                    }
                    _ => {
                        cumulative_trapezoid(&rate, grid_z.step(), &mut acc);
                        for j in 0..nz {
                            smooth[j * nt + it] = -acc[j].scale(half);
                        }
                    }
                }
            })?;
        }
        _ => {
            let from_b = matches!(name, KernelName::Ba | KernelName::Bb | KernelName::Bc);
            let mut init = vec![zero; 4 * nz];
            let start = if from_b { 0 } else { nz };
            for v in &mut init[start..start + nz] {
                *v = one;
            }
            let mut entrance = vec![zero; nt];
            let nothing = |_t: T| zero;
            march(grid_t, grid_z, params.r(), Layout::Tangent, nothing, init, |it, s, _a| {
                let b = &s[..nz];
                let c = &s[nz..2 * nz];
                let bz = &s[2 * nz..3 * nz];
                let cz = &s[3 * nz..];
                let (src, dz_part, entry) = match name {
                    KernelName::Ba | KernelName::Ca => (c, false, zero),
                    KernelName::Bb | KernelName::Cb => (bz, true, b[0]),
                    _ => (cz, true, c[0]),
                };
                for j in 0..nz {
                    smooth[j * nt + it] = if dz_part { src[j].scale(two) } else { src[j] };
                }
                entrance[it] = entry.scale(two);
            })?;
            if !matches!(name, KernelName::Ba | KernelName::Ca) {
                delta_z = Some(entrance);
            }
        }
    }

    Ok(KernelField {
        name,
        grid_t: *grid_t,
        grid_z: *grid_z,
        delta_t_weight: if name == KernelName::Aa { one } else { zero },
        delta_z,
        smooth,
        provenance: Provenance::Impulse,
        params: *params,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{build_kernel, KernelStrategy};

    fn grids(t: f64, nt: usize, z: f64, nz: usize) -> (QuadratureGrid<f64>, QuadratureGrid<f64>) {
        (QuadratureGrid::spanning(0.0, t, nt).unwrap(), QuadratureGrid::spanning(0.0, z, nz).unwrap())
    }

    #[test]
    fn aa_at_entrance_is_a_pure_delta() {
        let (gt, gz) = grids(4.0, 64, 2.0, 16);
        let p = DetuningParams::new(0.5).unwrap();
        let k = impulse_response(KernelName::Aa, &gt, &gz, &p).unwrap();
        assert_eq!(k.delta_t_weight(), Complex::new(1.0, 0.0));
        assert!(k.column(0).iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn every_kernel_matches_the_analytic_form() {
        let (gt, gz) = grids(6.0, 512, 5.0, 256);
        for r in [0.0, 0.7] {
            let p = DetuningParams::new(r).unwrap();
            for name in KernelName::ALL {
                let a = build_kernel(name, &gt, &gz, &p, KernelStrategy::Analytic).unwrap();
                let i = impulse_response(name, &gt, &gz, &p).unwrap();
                let d = i.relative_l2_difference(&a).unwrap();
                assert!(d < 5e-4, "{name} at r = {r}: {d}");
                match (a.delta_z(), i.delta_z()) {
                    (Some(x), Some(y)) => {
                        for (u, v) in x.iter().zip(y) {
                            assert!((u - v).norm() < 1e-6, "{name} delta {}", (u - v).norm());
                        }
                    }
                    (None, None) => {}
                    _ => panic!("{name}: delta parts disagree"),
                }
            }
        }
    }

    #[test]
    fn large_length_impulse_kernel_is_finite() {
        let (gt, gz) = grids(4.0 * std::f64::consts::PI, 512, 100.0, 256);
        let p = DetuningParams::new(2.0).unwrap();
        let k = impulse_response(KernelName::Ab, &gt, &gz, &p).unwrap();
        assert!(k.smooth.iter().all(|v| v.norm().is_finite() && v.norm() < 10.0));
    }
}
