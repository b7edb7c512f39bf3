// Copyright 2026 The lambdamem Authors
// SPDX-License-Identifier: Apache-2.0

//! Loss scans, optimum search over the write duration, detuning sweeps and
//! regime classification.
//!
//! Every sample is an independent write; samples run on the rayon pool and
//! are collected in parameter order, so results do not depend on scheduling.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;

use crate::config::{SimulationConfig, MAX_DETUNING};
use crate::dynamics::{unit_input, Recording};
use crate::error::{Error, Result};
use crate::io::emit::{Artifact, Table};
use crate::kernels::{DetuningParams, KernelStrategy};
use crate::writing::{simulate_write_with, EfficiencyReport, Solver, WriteOptions};

/// Smallest number of samples in a loss scan.
pub const MIN_SCAN_POINTS: usize = 16;
/// Coarse scan size used by [`minimize_total_losses`].
pub const OPTIMUM_SCAN_POINTS: usize = 64;
/// Golden-section stop: bracket width in `t_write`.
pub const BRACKET_TOLERANCE: f64 = 1e-3;
/// Losses within this many points of a minimum count as the same plateau.
pub const PLATEAU_TOLERANCE: f64 = 0.05;
/// A plateau spans at least this many consecutive scan samples.
pub const PLATEAU_MIN_SAMPLES: usize = 3;
/// `|d n_eff / dr|` below this (points per unit `r`) marks a detuning plateau.
pub const SLOPE_THRESHOLD: f64 = 7.0;
/// Largest write duration accepted by the scans.
pub const MAX_T_WRITE: f64 = 8.0 * PI;
/// Regime thresholds, in loss points.
pub const RESONANT_THRESHOLD: f64 = 1.5;
pub const RAMAN_THRESHOLD: f64 = 2.5;
/// Default write-duration range of [`classify_regime`]: `(0, 4 pi]`.
pub const DEFAULT_T_RANGE: (f64, f64) = (0.0, 4.0 * PI);

/// Solver and resolution of every scan sample.
///
/// Each sample is a write of duration `t_write` on `steps_t` time intervals
/// and `steps_z` cells, so the relative resolution does not change along a scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanSettings {
    pub solver: Solver,
    pub steps_t: usize,
    pub steps_z: usize,
    pub strategy: KernelStrategy,
}

impl Default for ScanSettings {
    fn default() -> Self {
        Self { solver: Solver::Oracle, steps_t: 512, steps_z: 512, strategy: KernelStrategy::Auto }
    }
}

/// Scanned parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    TWrite,
    Length,
    Detuning,
}

impl Axis {
    pub fn as_str(&self) -> &'static str {
        match self {
            Axis::TWrite => "t_write",
            Axis::Length => "length",
            Axis::Detuning => "detuning",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LossSample {
    pub value: f64,
    pub leakage: f64,
    pub total_losses: f64,
    pub n_eff: f64,
    pub excited_loss: f64,
}

/// Losses along one axis; the other two parameters are held at the context values.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LossCurve {
    pub axis: Axis,
    pub samples: Vec<LossSample>,
    pub t_write: Option<f64>,
    pub length: Option<f64>,
    pub r: Option<f64>,
    pub settings: ScanSettings,
}

impl LossCurve {
    pub fn values(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.value).collect()
    }

    pub fn total_losses(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.total_losses).collect()
    }

    pub fn leakage(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.leakage).collect()
    }

    pub fn n_eff(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.n_eff).collect()
    }
}

impl Artifact for LossCurve {
    fn table(&self) -> Table {
        let mut t = Table::new(&[self.axis.as_str(), "leakage", "total_losses", "n_eff", "excited_loss"]);
        for s in &self.samples {
            t.push(vec![s.value, s.leakage, s.total_losses, s.n_eff, s.excited_loss]);
        }
        t
    }

    fn json(&self) -> Value {
        serde_json::to_value(self).unwrap_or(Value::Null)
    }
}

/// One write evaluated with scan settings and a unit rectangular input.
pub fn evaluate(length: f64, params: &DetuningParams<f64>, t_write: f64, settings: &ScanSettings) -> Result<EfficiencyReport> {
    let config = SimulationConfig::new(t_write, length, params.r())?
        .with_detuning(*params)?
        .with_t_read(t_write)?
        .with_grid(settings.steps_t, settings.steps_z)?
        .with_strategy(settings.strategy);
    let options = WriteOptions { solver: settings.solver, recording: Recording::Output, cache: None };
    Ok(simulate_write_with(&config, unit_input, options)?.report)
}

fn sample(value: f64, r: EfficiencyReport) -> LossSample {
    LossSample {
        value,
        leakage: r.leakage,
        total_losses: r.total_losses,
        n_eff: r.n_eff,
        excited_loss: r.excited_loss,
    }
}

/// `n` points on `(lo, hi]`: `lo + (hi - lo) k / n` for `k = 1..=n`.
pub fn scan_points(range: (f64, f64), n: usize) -> Vec<f64> {
    let (lo, hi) = range;
    (1..=n).map(|k| lo + (hi - lo) * k as f64 / n as f64).collect()
}

fn check_t_range(range: (f64, f64), n: usize) -> Result<()> {
    let (lo, hi) = range;
    if !(lo >= 0.0 && hi > lo && hi <= MAX_T_WRITE * (1.0 + 1e-12)) {
        return Err(Error::Config(format!("t_range ({lo}, {hi}] must lie within (0, 8 pi]")));
    }
    if n < MIN_SCAN_POINTS {
        return Err(Error::Config(format!("a scan needs at least {MIN_SCAN_POINTS} points, got {n}")));
    }
    Ok(())
}

/// Losses against the write duration over `(t_range.0, t_range.1]`.
pub fn scan_losses(
    length: f64,
    params: &DetuningParams<f64>,
    t_range: (f64, f64),
    n_points: usize,
    settings: &ScanSettings,
) -> Result<LossCurve> {
    check_t_range(t_range, n_points)?;
    let ts = scan_points(t_range, n_points);
    let samples = ts
        .par_iter()
        .map(|&t| evaluate(length, params, t, settings).map(|r| sample(t, r)))
        .collect::<Result<Vec<_>>>()?;
    Ok(LossCurve { axis: Axis::TWrite, samples, t_write: None, length: Some(length), r: Some(params.r()), settings: *settings })
}

/// Losses against the medium length at fixed write duration.
pub fn scan_lengths(
    lengths: &[f64],
    params: &DetuningParams<f64>,
    t_write: f64,
    settings: &ScanSettings,
) -> Result<LossCurve> {
    let mut sorted = lengths.to_vec();
    sorted.sort_by(f64::total_cmp);
    let samples = sorted
        .par_iter()
        .map(|&l| evaluate(l, params, t_write, settings).map(|r| sample(l, r)))
        .collect::<Result<Vec<_>>>()?;
    Ok(LossCurve { axis: Axis::Length, samples, t_write: Some(t_write), length: None, r: Some(params.r()), settings: *settings })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LocalMinimum {
    pub t_write: f64,
    pub total_losses: f64,
    /// `(first, last)` scan values within [`PLATEAU_TOLERANCE`] of this
    /// minimum, when they span at least [`PLATEAU_MIN_SAMPLES`] samples.
    pub plateau: Option<(f64, f64)>,
    pub global: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimumReport {
    pub t_write_opt: f64,
    pub loss_at_opt: f64,
    pub all_local_minima: Vec<LocalMinimum>,
    pub bracket_tolerance: f64,
    /// Scan step `delta` used to verify minima.
    pub scan_step: f64,
    /// No interior minimum: the optimum sits on the range boundary.
    pub boundary: bool,
    pub warnings: Vec<String>,
    pub length: f64,
    pub r: f64,
    pub t_range: (f64, f64),
    pub settings: ScanSettings,
}

impl Artifact for OptimumReport {
    fn table(&self) -> Table {
        let mut t = Table::new(&["t_write", "total_losses", "global"]);
        for m in &self.all_local_minima {
            t.push(vec![m.t_write, m.total_losses, if m.global { 1.0 } else { 0.0 }]);
        }
        t
    }

    fn json(&self) -> Value {
        serde_json::to_value(self).unwrap_or(Value::Null)
    }
}

/// Golden-section search for a minimum of `f` in `[a, b]` until `b - a < tol`.
pub fn golden_section<F: FnMut(f64) -> Result<f64>>(mut f: F, mut a: f64, mut b: f64, tol: f64) -> Result<(f64, f64)> {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    while b - a >= tol {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2)?;
        }
    }
    Ok(if f1 <= f2 { (x1, f1) } else { (x2, f2) })
}

/// Coarse scan of at least [`OPTIMUM_SCAN_POINTS`] samples, then golden-section
/// refinement of every bracketed minimum.
///
/// On a plateau the optimum is the smallest write duration whose loss is
/// within [`PLATEAU_TOLERANCE`] of the plateau minimum.
pub fn minimize_total_losses(
    length: f64,
    params: &DetuningParams<f64>,
    t_range: (f64, f64),
    settings: &ScanSettings,
) -> Result<OptimumReport> {
    let curve = scan_losses(length, params, t_range, OPTIMUM_SCAN_POINTS, settings)?;
    let ts = curve.values();
    let ls = curve.total_losses();
    let n = ts.len();
    let step = ts[1] - ts[0];
    let objective = |t: f64| evaluate(length, params, t, settings).map(|r| r.total_losses);

    let brackets: Vec<usize> = (1..n - 1).filter(|&i| ls[i] <= ls[i - 1] && ls[i] <= ls[i + 1]).collect();
    // a flat run yields several brackets; keep the first of each run
    let mut seeds: Vec<usize> = Vec::new();
    for &i in &brackets {
        if let Some(&last) = seeds.last() {
            let flat = (last..=i).all(|j| (ls[j] - ls[last]).abs() <= PLATEAU_TOLERANCE);
            if flat {
                continue;
            }
        }
        seeds.push(i);
    }
    let refined = seeds
        .par_iter()
        .map(|&i| golden_section(objective, ts[i - 1], ts[i + 1], BRACKET_TOLERANCE))
        .collect::<Result<Vec<_>>>()?;

    let mut minima: Vec<LocalMinimum> = seeds
        .iter()
        .zip(&refined)
        .map(|(&i, &(t, l))| {
            let within = |j: usize| ls[j] <= l + PLATEAU_TOLERANCE;
            let (mut lo, mut hi) = (i, i);
            while lo > 0 && within(lo - 1) {
                lo -= 1;
            }
            while hi + 1 < n && within(hi + 1) {
                hi += 1;
            }
            let plateau = (hi - lo + 1 >= PLATEAU_MIN_SAMPLES).then(|| (ts[lo], ts[hi]));
            LocalMinimum { t_write: t, total_losses: l, plateau, global: false }
        })
        .collect();

    let mut warnings = Vec::new();
    let boundary = minima.is_empty();
    let (t_opt, loss_opt) = if boundary {
        let (i, _) = ls.iter().enumerate().fold((0, f64::INFINITY), |(bi, bl), (i, &l)| if l < bl { (i, l) } else { (bi, bl) });
        warnings.push(format!("no interior minimum in ({}, {}]; optimum at the boundary", t_range.0, t_range.1));
        (ts[i], ls[i])
    } else {
        let best = minima.iter().map(|m| m.total_losses).fold(f64::INFINITY, f64::min);
        let g = minima
            .iter()
            .position(|m| m.total_losses <= best + PLATEAU_TOLERANCE)
            .expect("nonempty");
        minima[g].global = true;
        let m = minima[g];
        match m.plateau {
            Some((first, _)) if first < m.t_write => {
                // smallest t with loss within tolerance, by bisection on the rising left edge
                let target = m.total_losses + PLATEAU_TOLERANCE;
                let mut hi = first;
                let mut lo = (first - step).max(t_range.0);
                if objective(lo)? <= target {
                    hi = lo;
                } else {
                    while hi - lo >= BRACKET_TOLERANCE {
                        let mid = 0.5 * (lo + hi);
                        if objective(mid)? <= target {
                            hi = mid;
                        } else {
                            lo = mid;
                        }
                    }
                }
                (hi, objective(hi)?)
            }
            _ => (m.t_write, m.total_losses),
        }
    };

    Ok(OptimumReport {
        t_write_opt: t_opt,
        loss_at_opt: loss_opt,
        all_local_minima: minima,
        bracket_tolerance: BRACKET_TOLERANCE,
        scan_step: step,
        boundary,
        warnings,
        length,
        r: params.r(),
        t_range,
        settings: *settings,
    })
}

/// `n_eff` against the detuning with plateau annotation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetuningSweep {
    pub length: f64,
    pub t_write: f64,
    pub samples: Vec<(f64, f64)>,
    /// `(r_start, r_end)` runs where `|d n_eff / dr| < SLOPE_THRESHOLD`.
    pub plateaus: Vec<(f64, f64)>,
    pub slope_threshold: f64,
}

impl Artifact for DetuningSweep {
    fn table(&self) -> Table {
        let mut t = Table::new(&["r", "n_eff"]);
        for &(r, n) in &self.samples {
            t.push(vec![r, n]);
        }
        t
    }

    fn json(&self) -> Value {
        serde_json::to_value(self).unwrap_or(Value::Null)
    }
}

/// `n` points on `[lo, hi]` inclusive.
fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
}

/// Runs of at least two samples with slope below `threshold`; slopes are
/// one-sided at the ends and central inside.
pub fn detect_plateaus(samples: &[(f64, f64)], threshold: f64) -> Vec<(f64, f64)> {
    let n = samples.len();
    if n < 2 {
        return Vec::new();
    }
    let slope = |i: usize| {
        let (a, b) = if i == 0 { (0, 1) } else if i == n - 1 { (n - 2, n - 1) } else { (i - 1, i + 1) };
        (samples[b].1 - samples[a].1) / (samples[b].0 - samples[a].0)
    };
    let flat: Vec<bool> = (0..n).map(|i| slope(i).abs() < threshold).collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < n {
        if flat[i] {
            let start = i;
            while i + 1 < n && flat[i + 1] {
                i += 1;
            }
            if i > start {
                out.push((samples[start].0, samples[i].0));
            }
        }
        i += 1;
    }
    out
}

pub fn sweep_detuning(
    length: f64,
    t_write: f64,
    r_range: (f64, f64),
    n_points: usize,
    settings: &ScanSettings,
) -> Result<DetuningSweep> {
    let (lo, hi) = r_range;
    if !(lo >= 0.0 && hi >= lo && hi <= MAX_DETUNING) {
        return Err(Error::DetuningRange { r: if lo < 0.0 { lo } else { hi }, max: MAX_DETUNING });
    }
    if n_points < 2 {
        return Err(Error::Config("a detuning sweep needs at least 2 points".into()));
    }
    let rs = linspace(lo, hi, n_points);
    let samples = rs
        .par_iter()
        .map(|&r| {
            let p = DetuningParams::new(r)?;
            evaluate(length, &p, t_write, settings).map(|rep| (r, rep.n_eff))
        })
        .collect::<Result<Vec<_>>>()?;
    let plateaus = detect_plateaus(&samples, SLOPE_THRESHOLD);
    Ok(DetuningSweep { length, t_write, samples, plateaus, slope_threshold: SLOPE_THRESHOLD })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    ResonantOk,
    Intermediate,
    RamanOk,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::ResonantOk => "resonant-ok",
            Regime::Intermediate => "intermediate",
            Regime::RamanOk => "raman-ok",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegimeReport {
    pub regime: Regime,
    pub r: f64,
    pub length: f64,
    /// Largest `|losses(r) - losses(0)|` over the scan, in points.
    pub deviation_from_resonant: f64,
    /// Largest `|losses(r) - losses_raman(r)|`; infinite at `r = 0`.
    pub deviation_from_raman: f64,
    pub exact: LossCurve,
    pub resonant: LossCurve,
    pub raman: Option<LossCurve>,
}

impl Artifact for RegimeReport {
    fn table(&self) -> Table {
        let mut t = Table::new(&["t_write", "exact", "resonant", "raman"]);
        for (i, s) in self.exact.samples.iter().enumerate() {
            let raman = self.raman.as_ref().map_or(f64::NAN, |c| c.samples[i].total_losses);
            t.push(vec![s.value, s.total_losses, self.resonant.samples[i].total_losses, raman]);
        }
        t
    }

    fn json(&self) -> Value {
        serde_json::json!({
            "regime": self.regime.as_str(),
            "r": self.r,
            "length": self.length,
            "deviation_from_resonant": self.deviation_from_resonant,
            "deviation_from_raman": if self.deviation_from_raman.is_finite() { Value::from(self.deviation_from_raman) } else { Value::Null },
        })
    }
}

fn max_deviation(a: &LossCurve, b: &LossCurve) -> f64 {
    a.samples.iter().zip(&b.samples).map(|(x, y)| (x.total_losses - y.total_losses).abs()).fold(0.0, f64::max)
}

/// Compares the exact total-loss curve at `r` with the resonant curve and
/// with the Raman-limit curve over `t_range` ([`MIN_SCAN_POINTS`] samples
/// unless `n_points` is larger).
pub fn classify_regime(
    params: &DetuningParams<f64>,
    length: f64,
    t_range: (f64, f64),
    n_points: usize,
    settings: &ScanSettings,
) -> Result<RegimeReport> {
    let n = n_points.max(MIN_SCAN_POINTS);
    let exact = scan_losses(length, params, t_range, n, settings)?;
    let p0 = params.with_r(0.0)?;
    let resonant = scan_losses(length, &p0, t_range, n, settings)?;
    let raman = if params.r() > 0.0 {
        let s = ScanSettings { solver: Solver::Raman, ..*settings };
        Some(scan_losses(length, params, t_range, n, &s)?)
    } else {
        None
    };
    let dev0 = max_deviation(&exact, &resonant);
    let dev_r = raman.as_ref().map_or(f64::INFINITY, |c| max_deviation(&exact, c));
    let regime = if dev0 <= RESONANT_THRESHOLD {
        Regime::ResonantOk
    } else if dev_r <= RAMAN_THRESHOLD {
        Regime::RamanOk
    } else {
        Regime::Intermediate
    };
    Ok(RegimeReport {
        regime,
        r: params.r(),
        length,
        deviation_from_resonant: dev0,
        deviation_from_raman: dev_r,
        exact,
        resonant,
        raman,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coarse() -> ScanSettings {
        ScanSettings { steps_t: 128, steps_z: 128, ..Default::default() }
    }

    #[test]
    fn golden_section_finds_a_parabola_vertex() {
        let (x, y) = golden_section(|x| Ok((x - 1.234).powi(2) + 2.0), 0.0, 3.0, 1e-6).unwrap();
        assert!((x - 1.234).abs() < 1e-6);
        assert!((y - 2.0).abs() < 1e-12);
    }

    #[test]
    fn scan_points_are_half_open() {
        let p = scan_points((0.0, 4.0), 4);
        assert_eq!(p, vec![1.0, 2.0, 3.0, 4.0]);
    }

    #[test]
    fn range_and_size_are_checked() {
        let p = DetuningParams::new(0.0).unwrap();
        assert!(scan_losses(10.0, &p, (0.0, 30.0), 16, &coarse()).is_err());
        assert!(scan_losses(10.0, &p, (0.0, 5.0), 15, &coarse()).is_err());
        assert!(sweep_detuning(10.0, 3.0, (0.0, 4.0), 8, &coarse()).is_err());
    }

    #[test]
    fn transparent_medium_is_flat_at_full_loss() {
        let p = DetuningParams::new(0.0).unwrap();
        let c = scan_losses(1e-9, &p, (0.0, 2.0 * PI), 16, &coarse()).unwrap();
        for s in &c.samples {
            assert!((s.total_losses - 100.0).abs() < 1e-6);
            assert!((s.leakage - 100.0).abs() < 1e-6);
        }
    }

    #[test]
    fn plateau_detection() {
        let s: Vec<(f64, f64)> = (0..11).map(|i| {
            let r = i as f64 * 0.1;
            (r, if r <= 0.5 { 50.0 } else { 50.0 + 40.0 * (r - 0.5) })
        }).collect();
        let p = detect_plateaus(&s, 3.0);
        assert_eq!(p.len(), 1);
        assert_eq!(p[0].0, 0.0);
        assert!(p[0].1 >= 0.4 && p[0].1 <= 0.5, "{:?}", p);
    }

    #[test]
    fn curves_stay_in_range() {
        let p = DetuningParams::new(0.5).unwrap();
        let c = scan_losses(10.0, &p, (0.0, 2.0 * PI), 16, &coarse()).unwrap();
        for s in &c.samples {
            assert!(s.leakage >= -1e-9 && s.total_losses <= 100.0 + 1e-9);
            assert!(s.leakage <= s.total_losses + 1e-6);
        }
        assert!(c.values().windows(2).all(|w| w[0] < w[1]));
    }
}
