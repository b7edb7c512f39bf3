// Copyright 2026 The lambdamem Authors
// SPDX-License-Identifier: Apache-2.0

//! Artifact emission, configuration files, unit conversion and run manifests.

pub mod config_file;
pub mod emit;
pub mod manifest;
pub mod physical;
