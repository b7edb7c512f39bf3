// Copyright 2026 The lambdamem Authors
// SPDX-License-Identifier: Apache-2.0

//! Causal trapezoid convolution `(x * y)(t_k) = int_0^{t_k} x(t_k - s) y(s) ds`.

use std::sync::Arc;

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::scalar::Real;

/// Below this length the direct O(n^2) sum is used.
const DIRECT_LIMIT: usize = 64;

/// Reusable convolution engine for sequences of one fixed length.
pub(crate) struct Convolver<T: Real> {
    len: usize,
    step: T,
    fft: Option<FftPair<T>>,
}

struct FftPair<T: Real> {
    size: usize,
    forward: Arc<dyn Fft<T>>,
    inverse: Arc<dyn Fft<T>>,
    scratch: Vec<Complex<T>>,
}

/// Zero-padded spectrum of a sequence, ready for repeated products.
pub(crate) struct Spectrum<T> {
    head: Complex<T>,
    samples: Option<Vec<Complex<T>>>,
    bins: Vec<Complex<T>>,
}

impl<T: Real> Convolver<T> {
    pub(crate) fn new(len: usize, step: T) -> Self {
        let fft = (len > DIRECT_LIMIT).then(|| {
            let size = (2 * len).next_power_of_two();
            let mut planner = FftPlanner::new();
            let forward = planner.plan_fft_forward(size);
            let inverse = planner.plan_fft_inverse(size);
            let scratch_len = forward
                .get_inplace_scratch_len()
                .max(inverse.get_inplace_scratch_len());
            FftPair {
                size,
                forward,
                inverse,
                scratch: vec![Complex::new(T::zero(), T::zero()); scratch_len],
            }
        });
        Self { len, step, fft }
    }

    pub(crate) fn spectrum(&mut self, x: &[Complex<T>]) -> Spectrum<T> {
        debug_assert_eq!(x.len(), self.len);
        match &mut self.fft {
            None => Spectrum {
                head: x[0],
                samples: Some(x.to_vec()),
                bins: Vec::new(),
            },
            Some(f) => {
                let mut bins = vec![Complex::new(T::zero(), T::zero()); f.size];
                bins[..x.len()].copy_from_slice(x);
                f.forward.process_with_scratch(&mut bins, &mut f.scratch);
                Spectrum {
                    head: x[0],
                    samples: None,
                    bins,
                }
            }
        }
    }

    /// Trapezoid convolution of two prepared spectra, written into `out`.
    pub(crate) fn product(&mut self, x: &Spectrum<T>, y: &Spectrum<T>, xs: &[Complex<T>], ys: &[Complex<T>], out: &mut [Complex<T>]) {
        let n = self.len;
        let half = T::lit(0.5);
        match &mut self.fft {
            None => {
                let xv = x.samples.as_deref().unwrap_or(xs);
                let yv = y.samples.as_deref().unwrap_or(ys);
                for k in 0..n {
                    let mut acc = Complex::new(T::zero(), T::zero());
                    for j in 0..=k {
                        acc = acc + xv[k - j] * yv[j];
                    }
                    out[k] = acc;
                }
            }
            Some(f) => {
                let mut prod: Vec<Complex<T>> =
                    x.bins.iter().zip(&y.bins).map(|(a, b)| a * b).collect();
                f.inverse.process_with_scratch(&mut prod, &mut f.scratch);
                let norm = T::one() / T::from_count(f.size);
                for k in 0..n {
                    out[k] = prod[k].scale(norm);
                }
            }
        }
        for k in 0..n {
            out[k] = (out[k] - (xs[k] * y.head + x.head * ys[k]).scale(half)).scale(self.step);
        }
    }

    /// One-shot convolution.
    pub(crate) fn convolve(&mut self, x: &[Complex<T>], y: &[Complex<T>], out: &mut [Complex<T>]) {
        let sx = self.spectrum(x);
        let sy = self.spectrum(y);
        self.product(&sx, &sy, x, y, out);
    }
}
