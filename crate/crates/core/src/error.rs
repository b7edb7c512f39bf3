// Copyright 2026 The lambdamem Authors
// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

use crate::special_math::MathError;

/// Errors raised by the solvers, observables and I/O helpers.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Math(#[from] MathError),
    #[error("detuning r = {r} is outside the supported range [0, {max}]")]
    DetuningRange { r: f64, max: f64 },
    #[error("{what} must be non-negative and finite, got {value}")]
    Negative { what: &'static str, value: f64 },
    #[error("{what} must be positive and finite, got {value}")]
    NonPositive { what: &'static str, value: f64 },
    #[error("analytic kernel would lose about {bound:.2} digits to cancellation; use the impulse strategy")]
    Precision { bound: f64 },
    #[error("modified Bessel growth overflows at argument {x}; switch to the impulse strategy")]
    KernelOverflow { x: f64 },
    #[error("integration became unstable near t = {t}")]
    Unstable { t: f64 },
    #[error("the Raman limit is undefined at r = 0")]
    RamanAtResonance,
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("input energy is zero, ratio undefined")]
    ZeroInputEnergy,
    #[error("unsupported request: {0}")]
    Unsupported(&'static str),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_non_negative(what: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(Error::Negative { what, value })
    }
}

pub(crate) fn check_positive(what: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::NonPositive { what, value })
    }
}
