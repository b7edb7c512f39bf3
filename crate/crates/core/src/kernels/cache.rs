// Copyright 2026 The lambdamem Authors
// SPDX-License-Identifier: Apache-2.0

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use super::{build_kernel, resolve_strategy, CouplingWeights, DetuningParams, KernelField, KernelName, KernelStrategy, Provenance};
use crate::error::Result;
use crate::scalar::Real;
use crate::special_math::QuadratureGrid;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct Key {
    name: KernelName,
    t: (u64, u64, usize),
    z: (u64, u64, usize),
    r: u64,
    weights: CouplingWeights,
    provenance: Provenance,
}

fn grid_key<T: Real>(g: &QuadratureGrid<T>) -> (u64, u64, usize) {
    (g.start().to_f64_lossy().to_bits(), g.step().to_f64_lossy().to_bits(), g.count())
}

/// Thread-safe memo of built kernels keyed by name, grids, detuning and strategy.
#[derive(Debug, Default)]
pub struct KernelCache<T: Real> {
    map: RwLock<HashMap<Key, Arc<KernelField<T>>>>,
}

impl<T: Real> KernelCache<T> {
    pub fn new() -> Self {
        Self { map: RwLock::new(HashMap::new()) }
    }

    pub fn len(&self) -> usize {
        self.map.read().map(|m| m.len()).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Returns the cached kernel or builds and inserts it.
    pub fn get_or_build(
        &self,
        name: KernelName,
        grid_t: &QuadratureGrid<T>,
        grid_z: &QuadratureGrid<T>,
        params: &DetuningParams<T>,
        strategy: KernelStrategy,
    ) -> Result<Arc<KernelField<T>>> {
        let provenance = resolve_strategy(strategy, params, grid_t.end(), grid_z.end())?;
        let key = Key {
            name,
            t: grid_key(grid_t),
            z: grid_key(grid_z),
            r: params.r().to_f64_lossy().to_bits(),
            weights: params.weights(),
            provenance,
        };
        if let Some(hit) = self.map.read().ok().and_then(|m| m.get(&key).cloned()) {
            return Ok(hit);
        }
        let concrete = match provenance {
            Provenance::Analytic => KernelStrategy::Analytic,
            Provenance::Impulse => KernelStrategy::Impulse,
        };
        let built = Arc::new(build_kernel(name, grid_t, grid_z, params, concrete)?);
        let mut map = self.map.write().unwrap_or_else(|e| e.into_inner());
        Ok(map.entry(key).or_insert(built).clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn second_lookup_hits_the_cache() {
        let cache = KernelCache::new();
        let gt = QuadratureGrid::spanning(0.0_f64, 2.0, 32).unwrap();
        let gz = QuadratureGrid::spanning(0.0_f64, 1.0, 8).unwrap();
        let p = DetuningParams::new(0.5).unwrap();
        let a = cache.get_or_build(KernelName::Ab, &gt, &gz, &p, KernelStrategy::Auto).unwrap();
        let b = cache.get_or_build(KernelName::Ab, &gt, &gz, &p, KernelStrategy::Analytic).unwrap();
        assert!(Arc::ptr_eq(&a, &b));
        let c = cache.get_or_build(KernelName::Ba, &gt, &gz, &p, KernelStrategy::Auto).unwrap();
        assert!(!Arc::ptr_eq(&a, &c));
        assert_eq!(cache.len(), 2);
    }

    #[test]
    fn concurrent_inserts_are_consistent() {
        let cache = Arc::new(KernelCache::new());
        let gt = QuadratureGrid::spanning(0.0_f64, 2.0, 32).unwrap();
        let gz = QuadratureGrid::spanning(0.0_f64, 1.0, 8).unwrap();
        let p = DetuningParams::new(0.2).unwrap();
        let handles: Vec<_> = (0..4)
            .map(|_| {
                let cache = cache.clone();
                std::thread::spawn(move || cache.get_or_build(KernelName::Cc, &gt, &gz, &p, KernelStrategy::Auto).unwrap())
            })
            .collect();
        let got: Vec<_> = handles.into_iter().map(|h| h.join().unwrap()).collect();
        assert_eq!(cache.len(), 1);
        for k in &got {
            assert_eq!(k.smooth, got[0].smooth);
        }
    }
}
