//! Simulated-null calibration table for the higher-criticism statistic.
//!
//! The reference distribution is simulated once per (n, p, grid) under
//! independent standard normals and cached. The cache is read-mostly: a
//! single writer fills an entry, many readers clone the Arc.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rand_distr::{Distribution, StandardNormal};

use crate::rng::{calibration_stream, splitmix64};
use crate::stats::one_sample::{hc2_from_t, HC_NULL_SIMS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct HcKey {
    n: usize,
    p: usize,
    grid_hash: u64,
}

fn grid_hash(grid: &[f64]) -> u64 {
    let mut h = splitmix64(grid.len() as u64);
    for &s in grid {
        h = splitmix64(h ^ s.to_bits());
    }
    h
}

fn cache() -> &'static Mutex<HashMap<HcKey, Arc<Vec<f64>>>> {
    static CACHE: OnceLock<Mutex<HashMap<HcKey, Arc<Vec<f64>>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Sorted (ascending) null draws of the higher-criticism statistic at the
/// given design. Deterministic in (n, p, grid).
pub(crate) fn hc_null_draws(n: usize, p: usize, grid: &[f64]) -> Arc<Vec<f64>> {
    let key = HcKey {
        n,
        p,
        grid_hash: grid_hash(grid),
    };
    if let Some(found) = cache().lock().expect("hc cache poisoned").get(&key) {
        return Arc::clone(found);
    }
    let draws = simulate_null(n, p, grid, key.grid_hash);
    let entry = Arc::new(draws);
    let mut table = cache().lock().expect("hc cache poisoned");
    // another thread may have raced us here; keep the first entry
    Arc::clone(table.entry(key).or_insert(entry))
}

fn simulate_null(n: usize, p: usize, grid: &[f64], grid_hash: u64) -> Vec<f64> {
    let key = splitmix64(n as u64)
        ^ splitmix64((p as u64).rotate_left(17))
        ^ grid_hash;
    let mut rng = calibration_stream(key);
    let mut draws = Vec::with_capacity(HC_NULL_SIMS);
    let mut t = vec![0.0f64; p];
    let nf = n as f64;
    for _ in 0..HC_NULL_SIMS {
        // column summaries of an n x p standard normal matrix
        for tj in t.iter_mut() {
            let mut sum = 0.0;
            let mut sum_sq = 0.0;
            for _ in 0..n {
                let z: f64 = StandardNormal.sample(&mut rng);
                sum += z;
                sum_sq += z * z;
            }
            let mean = sum / nf;
            let var = (sum_sq - nf * mean * mean) / (nf - 1.0);
            *tj = nf * mean * mean / var;
        }
        draws.push(hc2_from_t(&mut t, p, grid));
    }
    draws.sort_by(|a, b| a.partial_cmp(b).unwrap());
    draws
}
