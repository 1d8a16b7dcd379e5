//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Every export returns a JSON string; the plain functions below do the work
//! and are usable (and tested) natively.

use serde_json::{json, Value};
use uvstat_core::diagnostics::ks_two_sample;
use uvstat_core::kernel::{EigenFormula, KernelSpec};
use uvstat_core::limit_law::{
    coincidence_limit_sample, coincidence_offset, divergence_table, series_substitution_sample, CovarianceModel,
};
use uvstat_core::ortho_basis::{BasisFamily, BasisSpec, MarginalLaw};
use uvstat_core::process::{ProcessKind, ProcessSpec};
use uvstat_core::rng::derive_seed;
use uvstat_core::ustat_engine::u_stat_factored;
use uvstat_core::Result;
use wasm_bindgen::prelude::*;

const MAX_REPLICATES: usize = 2000;
const MAX_N: usize = 4000;

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

/// Truncated eigen-series of `sign(ts)·min(|t|,|s|)` along `t ∈ [-1, 1]` for fixed `s`.
pub fn reconstruction(truncation: usize, s: f64, points: usize) -> Result<Value> {
    let kernel = KernelSpec::wiener(truncation.max(1));
    let tail = kernel.tail_mass(truncation).finite().unwrap_or(f64::INFINITY);
    let points = points.clamp(2, 2001);
    let mut t = Vec::with_capacity(points);
    let mut exact = Vec::with_capacity(points);
    let mut series = Vec::with_capacity(points);
    let mut worst: f64 = 0.0;
    for i in 0..points {
        let x = -1.0 + 2.0 * i as f64 / (points - 1) as f64;
        let e = (x * s).signum() * x.abs().min(s.abs());
        let v = kernel.eval(&[x, s], truncation)?;
        worst = worst.max((v - e).abs());
        t.push(x);
        exact.push(e);
        series.push(v);
    }
    Ok(json!({ "t": t, "exact": exact, "series": series, "max_error": worst, "bound": 2.0 * tail }))
}

/// `U_n` for the shift process with `f(t,t) ≡ 1 + β`, against the offset law
/// and the plug-in chi-square law.
pub fn compare_laws(n: usize, replicates: usize, truncation: usize, beta: f64, seed: u64) -> Result<Value> {
    let (n, replicates) = (n.clamp(2, MAX_N), replicates.clamp(10, MAX_REPLICATES));
    let truncation = truncation.clamp(1, 400);
    let kernel = KernelSpec::wiener(truncation).with_diagonal_override(1.0 + beta);
    let process = ProcessSpec::new(ProcessKind::OneDependentShift, MarginalLaw::UniformSymmetric, seed);
    let path_seed = process.with_seed(derive_seed(seed, n as u64));
    let model = CovarianceModel::scaled_identity(truncation, 1.5)?;
    let limit_seed = derive_seed(seed, 0);
    let mut stat = Vec::with_capacity(replicates);
    let mut offset_law = Vec::with_capacity(replicates);
    let mut plugin_law = Vec::with_capacity(replicates);
    for r in 0..replicates as u64 {
        stat.push(u_stat_factored(&kernel, &path_seed.sample_path(n, r), truncation)?);
        offset_law.push(coincidence_limit_sample(&kernel, &model, truncation, limit_seed, r)?);
        plugin_law.push(series_substitution_sample(&kernel, &model, truncation, limit_seed, r)?);
    }
    Ok(json!({
        "offset": coincidence_offset(&kernel, truncation)?,
        "ks_offset_law": ks_two_sample(&stat, &offset_law)?,
        "ks_plugin_law": ks_two_sample(&stat, &plugin_law)?,
        "stat": sorted(stat),
        "offset_law": sorted(offset_law),
        "plugin_law": sorted(plugin_law),
    }))
}

/// Medians of the adjacent-pair term and remainder for eigenvalues `1/k`
/// on the signed-geometric law.
pub fn divergence(grid: &[usize], replicates: usize, seed: u64) -> Result<Value> {
    let grid: Vec<usize> = grid.iter().map(|&n| n.clamp(2, MAX_N)).collect();
    let kernel = KernelSpec::eigen(BasisSpec::new(BasisFamily::DiscreteSigned, 40), 2, EigenFormula::OneOverK)?;
    let process = ProcessSpec::new(ProcessKind::OneDependentShift, MarginalLaw::SignedGeometric, seed);
    let table = divergence_table(&grid, &kernel, &process, replicates.clamp(10, 1000), 40)?;
    Ok(json!({ "rows": table.rows, "ratio": table.adjacent_growth_ratio() }))
}

fn to_js(r: Result<Value>) -> std::result::Result<String, JsError> {
    r.map(|v| v.to_string()).map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen(js_name = kernelReconstruction)]
pub fn kernel_reconstruction(truncation: usize, s: f64) -> std::result::Result<String, JsError> {
    to_js(reconstruction(truncation, s, 401))
}

#[wasm_bindgen(js_name = compareLaws)]
pub fn compare_laws_js(n: usize, replicates: usize, truncation: usize, beta: f64, seed: u32) -> std::result::Result<String, JsError> {
    to_js(compare_laws(n, replicates, truncation, beta, seed as u64))
}

#[wasm_bindgen(js_name = divergenceMedians)]
pub fn divergence_medians(grid: Vec<u32>, replicates: usize, seed: u32) -> std::result::Result<String, JsError> {
    let grid: Vec<usize> = grid.into_iter().map(|n| n as usize).collect();
    to_js(divergence(&grid, replicates, seed as u64))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reconstruction_within_bound() {
        let v = reconstruction(100, 0.4, 101).unwrap();
        assert!(v["max_error"].as_f64().unwrap() <= v["bound"].as_f64().unwrap());
        assert_eq!(v["t"].as_array().unwrap().len(), 101);
    }

    #[test]
    fn compare_laws_separates() {
        let v = compare_laws(400, 300, 50, 1.0, 7).unwrap();
        assert_eq!(v["offset"].as_f64().unwrap(), 1.0);
        assert!(v["ks_plugin_law"].as_f64().unwrap() > v["ks_offset_law"].as_f64().unwrap());
        let s = v["stat"].as_array().unwrap();
        assert!(s.windows(2).all(|w| w[0].as_f64() <= w[1].as_f64()));
    }

    #[test]
    fn divergence_rows() {
        let v = divergence(&[100, 200], 20, 3).unwrap();
        assert_eq!(v["rows"].as_array().unwrap().len(), 2);
        assert!(v["ratio"].as_f64().unwrap().is_finite());
    }
}
