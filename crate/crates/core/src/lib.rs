// Copyright 2026 The lambdamem Authors
// SPDX-License-Identifier: Apache-2.0

//! Write and read-out of a weak signal pulse in a Lambda-type atomic memory.
//!
//! The rescaled field `A(t, z)`, spin coherence `B` and optical coherence `C`
//! obey
//!
//! ```text
//! dA/dz = -C/2,   dC/dt = -2ir C + A + B,   dB/dt = -C
//! ```
//!
//! Two independent solvers are provided: convolution with closed-form
//! Green's-function kernels ([`kernels`], [`writing`], [`readout`]) and
//! direct time marching ([`dynamics`]). The [`optimizer`] scans losses over
//! the write duration and detuning; [`io`] converts physical units and
//! writes reproducible CSV/JSON artifacts.
//!
//! ```
//! use lambdamem::{config::SimulationConfig, dynamics::unit_input, writing::simulate_write};
//!
//! let cfg = SimulationConfig::new(5.5, 10.0, 0.0)?.with_grid(256, 128)?;
//! let w = simulate_write(&cfg, unit_input)?;
//! assert!((w.report.total_losses - 11.2).abs() < 0.5);
//! # Ok::<(), lambdamem::error::Error>(())
//! ```

// `!(x > 0)` is the NaN-rejecting form used throughout input validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// index loops mirror the multi-array stencils they implement
#![allow(clippy::needless_range_loop)]

pub mod config;
pub mod dynamics;
pub mod error;
pub mod io;
pub mod kernels;
pub mod optimizer;
pub mod readout;
pub mod scalar;
pub mod special_math;
pub mod writing;

pub use config::SimulationConfig;
pub use dynamics::{Direction, StorageState};
pub use error::{Error, Result};
pub use kernels::{DetuningParams, KernelField, KernelName, KernelStrategy};
pub use readout::ReadResult;
pub use writing::{EfficiencyReport, Solver, WriteResult};
