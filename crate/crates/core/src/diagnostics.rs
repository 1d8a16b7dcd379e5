//! Two-sample distances between replicate samples and convergence tables.

use rand::seq::index::sample;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rng::{component, stream};

/// Replicate-level values together with where they came from.
#[derive(Debug, Clone, Serialize)]
pub struct SampleSet {
    pub values: Vec<f64>,
    pub provenance: String,
}

impl SampleSet {
    pub fn new(values: Vec<f64>, provenance: impl Into<String>) -> Self {
        Self { values, provenance: provenance.into() }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

fn sorted(values: &[f64]) -> Result<Vec<f64>> {
    if values.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

/// Right-continuous empirical distribution function.
#[derive(Debug, Clone)]
pub struct Ecdf {
    sorted: Vec<f64>,
}

impl Ecdf {
    pub fn new(values: &[f64]) -> Result<Self> {
        Ok(Self { sorted: sorted(values)? })
    }

    /// `#{v ≤ x} / len`.
    pub fn eval(&self, x: f64) -> f64 {
        self.sorted.partition_point(|v| *v <= x) as f64 / self.sorted.len() as f64
    }

    /// Step corners `(x, F(x))` at each distinct sample value.
    pub fn steps(&self) -> Vec<(f64, f64)> {
        let n = self.sorted.len() as f64;
        let mut out: Vec<(f64, f64)> = Vec::new();
        for (i, &x) in self.sorted.iter().enumerate() {
            let f = (i + 1) as f64 / n;
            match out.last_mut() {
                Some(last) if last.0 == x => last.1 = f,
                _ => out.push((x, f)),
            }
        }
        out
    }

    pub fn sorted_values(&self) -> &[f64] {
        &self.sorted
    }
}

/// `sup_x |F_a(x) − F_b(x)|`.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<f64> {
    let a = sorted(a)?;
    let b = sorted(b)?;
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = if a[i] <= b[j] { a[i] } else { b[j] };
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(d)
}

/// `sup_x |F_a(x) − G(x)|` against a continuous distribution function.
pub fn ks_one_sample<G: Fn(f64) -> f64>(a: &[f64], cdf: G) -> Result<f64> {
    let a = sorted(a)?;
    let n = a.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in a.iter().enumerate() {
        let g = cdf(x);
        d = d.max((i + 1) as f64 / n - g).max(g - i as f64 / n);
    }
    Ok(d)
}

/// Two-sample critical value `c(α) √((n_a + n_b)/(n_a n_b))`; `c = 1.3581` at 5%.
pub fn ks_critical(na: usize, nb: usize, c_alpha: f64) -> f64 {
    c_alpha * ((na + nb) as f64 / (na * nb) as f64).sqrt()
}

/// Mean absolute difference of order statistics. The larger sample is
/// first reduced to the size of the smaller one by subsampling without
/// replacement, keyed by `seed`.
pub fn wasserstein1(a: &[f64], b: &[f64], seed: u64) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySample);
    }
    let shrink = |v: &[f64], to: usize| -> Vec<f64> {
        if v.len() == to {
            return v.to_vec();
        }
        let mut rng = stream(seed, 0, component::SUBSAMPLE);
        let mut idx = sample(&mut rng, v.len(), to).into_vec();
        idx.sort_unstable();
        idx.into_iter().map(|i| v[i]).collect()
    };
    let m = a.len().min(b.len());
    let a = sorted(&shrink(a, m))?;
    let b = sorted(&shrink(b, m))?;
    let diffs: Vec<f64> = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).collect();
    Ok(crate::numerics::pairwise_sum(&diffs) / m as f64)
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceRow {
    pub n: usize,
    #[serde(rename = "R")]
    pub replicates: usize,
    pub ks: f64,
    pub w1: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceTable {
    pub rows: Vec<ConvergenceRow>,
    /// KS non-increasing along the grid, with at most one upward step.
    pub ks_trend_decreasing: bool,
    pub ks_inversions: usize,
}

impl ConvergenceTable {
    pub fn last_ks(&self) -> Option<f64> {
        self.rows.last().map(|r| r.ks)
    }
}

/// Distances from each `(n, sample)` to a common limit sample.
pub fn convergence_table(stats: &[(usize, Vec<f64>)], limit: &[f64], seed: u64) -> Result<ConvergenceTable> {
    let rows = stats
        .iter()
        .map(|(n, s)| {
            Ok(ConvergenceRow {
                n: *n,
                replicates: s.len(),
                ks: ks_two_sample(s, limit)?,
                w1: wasserstein1(s, limit, seed)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let ks_inversions = rows.windows(2).filter(|w| w[1].ks > w[0].ks).count();
    Ok(ConvergenceTable { ks_trend_decreasing: ks_inversions <= 1, ks_inversions, rows })
}
