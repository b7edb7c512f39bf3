// Copyright 2026 The lambdamem Authors
// SPDX-License-Identifier: Apache-2.0

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use lambdamem::config::DEFAULT_STEPS_T;
use lambdamem::dynamics::{unit_input, Recording};
use lambdamem::io::emit::{emit, Artifact, Format, Table};
use lambdamem::io::manifest::RunManifest;
use lambdamem::kernels::{build_kernel, KernelCache};
use lambdamem::optimizer::{
    classify_regime, minimize_total_losses, scan_lengths, scan_losses, sweep_detuning, ScanSettings, DEFAULT_T_RANGE,
    OPTIMUM_SCAN_POINTS,
};
use lambdamem::readout::{
    mode_capacity, oscillation_period, peaks, simulate_read_with, write_then_read, ReadOptions,
};
use lambdamem::writing::{entrance_curve, simulate_write_with, storage_profile, WriteOptions};
use lambdamem::{Direction, Error, KernelName, KernelStrategy, Solver};
use serde_json::{json, Value};

use crate::settings::{config_json, Settings};

/// Relative prominence for counting intensity oscillation peaks.
const PEAK_PROMINENCE: f64 = 0.05;

/// Outcome of one command.
pub struct Outcome {
    pub summary: Value,
    pub written: Vec<PathBuf>,
    pub manifest: RunManifest,
    /// Set by `oracle-check` when a check fails.
    pub tolerance_failed: bool,
}

/// A table and a JSON document emitted together.
struct Doc {
    table: Table,
    json: Value,
}

impl Artifact for Doc {
    fn table(&self) -> Table {
        self.table.clone()
    }

    fn json(&self) -> Value {
        self.json.clone()
    }
}

pub struct Ctx<'a> {
    pub settings: &'a Settings,
    pub out: &'a Path,
    pub format: Format,
}

impl Ctx<'_> {
    fn emit<A: Artifact>(&self, a: &A, stem: &str, written: &mut Vec<PathBuf>) -> Result<(), Error> {
        written.extend(emit(a, self.format, self.out, stem)?);
        Ok(())
    }

    fn scan_settings(&self) -> Result<ScanSettings, Error> {
        let d = ScanSettings::default();
        let (nt, nz) = self.settings.grid(d.steps_t, d.steps_z)?;
        Ok(ScanSettings {
            solver: self.settings.or("solver", d.solver)?,
            steps_t: nt,
            steps_z: nz,
            strategy: self.settings.or("strategy", d.strategy)?,
        })
    }

    fn t_range(&self) -> Result<(f64, f64), Error> {
        Ok((self.settings.or("t_min", DEFAULT_T_RANGE.0)?, self.settings.or("t_max", DEFAULT_T_RANGE.1)?))
    }

    fn direction(&self) -> Result<Direction, Error> {
        self.settings.or("direction", Direction::Backward)
    }

    fn finish(&self, command: &str, config: Value, grid: (usize, usize), strategy: &str, summary: Value, written: Vec<PathBuf>) -> Result<Outcome, Error> {
        let mut manifest = RunManifest::new(command, config, grid.0, grid.1, strategy);
        if let Some((p, c)) = self.settings.physical()? {
            manifest.physical = Some(json!({ "params": p, "conversion": c }));
        }
        manifest.record(&written)?;
        Ok(Outcome { summary, written, manifest, tolerance_failed: false })
    }
}

pub fn coherence(ctx: &Ctx) -> Result<Outcome, Error> {
    let s = ctx.settings;
    let r: f64 = s.or("r", 0.0)?;
    let t_max: f64 = s.or("t_max", 25.0)?;
    let n: usize = s.or("grid_t", DEFAULT_STEPS_T)?;
    let params = s.detuning(r)?;
    let table = entrance_curve(&params, t_max, n)?;
    let peak = table.rows.iter().map(|row| row[1]).fold(0.0, f64::max);
    let summary = json!({ "r": r, "t_max": t_max, "intervals": n, "max_abs_b_sq": peak });
    let mut written = Vec::new();
    ctx.emit(&Doc { table, json: summary.clone() }, "coherence", &mut written)?;
    ctx.finish("coherence", json!({ "r": r, "t_max": t_max }), (n, 0), "analytic", summary, written)
}

fn solver(ctx: &Ctx) -> Result<Solver, Error> {
    ctx.settings.or("solver", Solver::Kernel)
}

pub fn write(ctx: &Ctx) -> Result<Outcome, Error> {
    let cfg = ctx.settings.sim_config()?;
    let solver = solver(ctx)?;
    let w = simulate_write_with(&cfg, unit_input, WriteOptions { solver, recording: Recording::Output, cache: None })?;
    let summary = json!({
        "report": w.report.json(),
        "config": config_json(&cfg),
        "solver": solver.as_str(),
    });
    let mut written = Vec::new();
    ctx.emit(&Doc { table: storage_profile(&w.stored), json: summary.clone() }, "write", &mut written)?;
    ctx.finish("write", config_json(&cfg), (cfg.steps_t, cfg.steps_z), cfg.strategy.as_str(), summary, written)
}

pub fn read(ctx: &Ctx) -> Result<Outcome, Error> {
    let cfg = ctx.settings.sim_config()?;
    let solver = solver(ctx)?;
    let direction = ctx.direction()?;
    let (w, r) = write_then_read(&cfg, unit_input, direction, solver)?;
    let summary = json!({
        "read": r.json(),
        "write": w.report.json(),
        "config": config_json(&cfg),
        "method": { "solver": solver.as_str(), "exact": solver != Solver::Raman },
    });
    let mut written = Vec::new();
    ctx.emit(&Doc { table: r.table(), json: summary.clone() }, "read", &mut written)?;
    ctx.finish("read", config_json(&cfg), (cfg.steps_t, cfg.steps_z), cfg.strategy.as_str(), summary, written)
}

pub fn optimize(ctx: &Ctx) -> Result<Outcome, Error> {
    let s = ctx.settings;
    let (_, length, r) = s.problem()?;
    let params = s.detuning(r)?;
    let settings = ctx.scan_settings()?;
    let range = ctx.t_range()?;
    let points: usize = s.or("points", OPTIMUM_SCAN_POINTS)?;
    let report = minimize_total_losses(length, &params, range, &settings)?;
    let curve = scan_losses(length, &params, range, points, &settings)?;
    let mut written = Vec::new();
    ctx.emit(&report, "optimize", &mut written)?;
    ctx.emit(&curve, "losses", &mut written)?;
    let cfg = json!({ "length": length, "r": r, "t_range": [range.0, range.1], "points": points, "solver": settings.solver.as_str() });
    ctx.finish("optimize", cfg, (settings.steps_t, settings.steps_z), settings.strategy.as_str(), report.json(), written)
}

pub fn sweep(ctx: &Ctx) -> Result<Outcome, Error> {
    let s = ctx.settings;
    let (t_write, length, r) = s.problem()?;
    let settings = ctx.scan_settings()?;
    let points: usize = s.or("points", 36)?;
    let axis: String = s.or("axis", "detuning".to_string())?;
    let mut written = Vec::new();
    let (summary, cfg) = match axis.as_str() {
        "detuning" => {
            let range = (s.or("r_min", 0.0)?, s.or("r_max", 3.5)?);
            let sw = sweep_detuning(length, t_write, range, points, &settings)?;
            ctx.emit(&sw, "sweep", &mut written)?;
            (sw.json(), json!({ "axis": axis, "length": length, "t_write": t_write, "r_range": [range.0, range.1], "points": points }))
        }
        "length" => {
            let (lo, hi): (f64, f64) = (s.or("l_min", 1.0)?, s.or("l_max", 40.0)?);
            if points < 2 {
                return Err(Error::Config("a length sweep needs at least 2 points".into()));
            }
            let ls: Vec<f64> = (0..points).map(|k| lo + (hi - lo) * k as f64 / (points - 1) as f64).collect();
            let curve = scan_lengths(&ls, &s.detuning(r)?, t_write, &settings)?;
            ctx.emit(&curve, "sweep", &mut written)?;
            (curve.json(), json!({ "axis": axis, "r": r, "t_write": t_write, "l_range": [lo, hi], "points": points }))
        }
        other => return Err(Error::Config(format!("unknown sweep axis `{other}`"))),
    };
    ctx.finish("sweep", cfg, (settings.steps_t, settings.steps_z), settings.strategy.as_str(), summary, written)
}

pub fn raman_compare(ctx: &Ctx) -> Result<Outcome, Error> {
    let cfg = ctx.settings.sim_config()?;
    let direction = ctx.direction()?;
    let exact_solver = match solver(ctx)? {
        Solver::Raman => Solver::Oracle,
        s => s,
    };
    let (ew, er) = write_then_read(&cfg, unit_input, direction, exact_solver)?;
    let (rw, rr) = write_then_read(&cfg, unit_input, direction, Solver::Raman)?;
    let ie = er.intensity();
    let ir = rr.intensity();
    let h = er.grid_t.step();
    let diff: Vec<f64> = ie.iter().zip(&ir).map(|(a, b)| a - b).collect();
    let period = oscillation_period(&diff, h, PEAK_PROMINENCE);
    let range = ir.iter().fold(0.0f64, |m, &v| m.max(v)) - ir.iter().fold(f64::INFINITY, |m, &v| m.min(v));
    let raman_peaks = peaks(&ir, PEAK_PROMINENCE * range).len();
    let settings = ctx.scan_settings()?;
    let regime = classify_regime(&cfg.detuning, cfg.length, (0.0, cfg.t_write.min(8.0 * PI)), 16, &settings)?;
    let mut table = Table::new(&["t", "exact", "raman"]);
    for (it, (a, b)) in ie.iter().zip(&ir).enumerate() {
        table.push(vec![er.grid_t.point(it), *a, *b]);
    }
    let summary = json!({
        "config": config_json(&cfg),
        "direction": direction.as_str(),
        "exact": { "solver": exact_solver.as_str(), "efficiency": er.efficiency, "total_losses": ew.report.total_losses },
        "raman": { "efficiency": rr.efficiency, "total_losses": rw.report.total_losses, "peaks": raman_peaks },
        "exact_minus_raman": er.efficiency - rr.efficiency,
        "oscillation_period": period,
        "four_pi_r": 4.0 * PI * cfg.detuning.r(),
        "regime": regime.json(),
    });
    let mut written = Vec::new();
    ctx.emit(&Doc { table, json: summary.clone() }, "raman_compare", &mut written)?;
    ctx.finish("raman-compare", config_json(&cfg), (cfg.steps_t, cfg.steps_z), cfg.strategy.as_str(), summary, written)
}

/// Kernel-vs-oracle and conservation checks on the configured problem.
pub fn oracle_check(ctx: &Ctx) -> Result<Outcome, Error> {
    let cfg = ctx.settings.sim_config()?;
    let direction = ctx.direction()?;
    let mut checks = Vec::new();
    let mut check = |name: &str, value: f64, tolerance: f64| {
        checks.push(json!({ "name": name, "value": value, "tolerance": tolerance, "pass": value.abs() < tolerance }));
    };

    let cache = KernelCache::new();
    let kw = simulate_write_with(&cfg, unit_input, WriteOptions { solver: Solver::Kernel, recording: Recording::Output, cache: Some(&cache) })?;
    let ow = simulate_write_with(&cfg, unit_input, WriteOptions { solver: Solver::Oracle, recording: Recording::Output, cache: None })?;
    check("write_leakage_difference", kw.report.leakage - ow.report.leakage, 0.2);
    check("write_n_eff_difference", kw.report.n_eff - ow.report.n_eff, 0.2);
    check("write_total_losses_difference", kw.report.total_losses - ow.report.total_losses, 0.2);
    check("oracle_balance_residual", ow.report.balance_residual, 1e-4);

    let kr = simulate_read_with(&kw.stored, kw.input_energy, &cfg, direction, ReadOptions { solver: Solver::Kernel, cache: Some(&cache), diffraction: false })?;
    let or = simulate_read_with(&ow.stored, ow.input_energy, &cfg, direction, ReadOptions { solver: Solver::Oracle, cache: None, diffraction: false })?;
    check("read_efficiency_difference", kr.efficiency - or.efficiency, 0.5);

    let (nt, nz) = (512, 256);
    let gt = lambdamem::special_math::QuadratureGrid::spanning(0.0, cfg.t_write, nt)?;
    let gz = lambdamem::special_math::QuadratureGrid::spanning(0.0, cfg.length, nz)?;
    let analytic = build_kernel(KernelName::Ab, &gt, &gz, &cfg.detuning, KernelStrategy::Analytic);
    match analytic {
        Ok(a) => {
            let i = build_kernel(KernelName::Ab, &gt, &gz, &cfg.detuning, KernelStrategy::Impulse)?;
            check("kernel_ab_relative_l2", a.relative_l2_difference(&i)?, 1e-3);
        }
        Err(Error::Precision { .. }) | Err(Error::KernelOverflow { .. }) => {}
        Err(e) => return Err(e),
    }

    let failed = checks.iter().any(|c| c["pass"] == Value::Bool(false));
    let summary = json!({ "config": config_json(&cfg), "direction": direction.as_str(), "checks": checks, "pass": !failed });
    let mut table = Table::new(&["value", "tolerance", "pass"]);
    for c in summary["checks"].as_array().into_iter().flatten() {
        table.push(vec![
            c["value"].as_f64().unwrap_or(f64::NAN),
            c["tolerance"].as_f64().unwrap_or(f64::NAN),
            if c["pass"] == Value::Bool(true) { 1.0 } else { 0.0 },
        ]);
    }
    let mut written = Vec::new();
    ctx.emit(&Doc { table, json: summary.clone() }, "oracle_check", &mut written)?;
    let mut out = ctx.finish("oracle-check", config_json(&cfg), (cfg.steps_t, cfg.steps_z), cfg.strategy.as_str(), summary, written)?;
    out.tolerance_failed = failed;
    Ok(out)
}

pub fn capacity(ctx: &Ctx) -> Result<Outcome, Error> {
    let s = ctx.settings;
    let need = |k: &str| -> Result<f64, Error> {
        s.get::<f64>(k)?.ok_or_else(|| Error::Config(format!("capacity needs `{k}`")))
    };
    let params = lambdamem::io::physical::PhysicalParams {
        rabi: 1.0,
        detuning: 0.0,
        coupling_density: 1.0,
        length: need("cell_length")?,
        pulse_duration: 1.0,
        gamma: 1.0,
        wavelength: need("wavelength")?,
        beam_area: need("beam_area")?,
    };
    let fresnel = lambdamem::readout::fresnel_number(&params)?;
    let forward = mode_capacity(&params, Direction::Forward)?;
    let backward = mode_capacity(&params, Direction::Backward)?;
    let summary = json!({ "fresnel_number": fresnel, "forward": forward, "backward": backward });
    let mut table = Table::new(&["fresnel_number", "forward", "backward"]);
    table.push(vec![fresnel, forward, backward]);
    let mut written = Vec::new();
    ctx.emit(&Doc { table, json: summary.clone() }, "capacity", &mut written)?;
    let cfg = json!({ "beam_area": params.beam_area, "wavelength": params.wavelength, "cell_length": params.length });
    let mut manifest = RunManifest::new("capacity", cfg, 0, 0, "none");
    manifest.record(&written)?;
    Ok(Outcome { summary, written, manifest, tolerance_failed: false })
}
