//! Limit laws of canonical U- and V-statistics of dependent sequences.
//!
//! The normalized basis sums `n^{-1/2} Σ_j e_k(X_j)` converge jointly to a
//! centered Gaussian vector `τ` whose covariance is the lag-0 Gram entry
//! plus twice the summed cross-lag moments. The U-statistic limit is then
//! `Σ f_i Π_j H_{ν_j(i)}(τ_j)` and the V-statistic limit `Σ f_i τ_{i_1}⋯τ_{i_m}`.

use nalgebra::{DMatrix, SymmetricEigen};
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::{KernelSpec, MultiIndex};
use crate::numerics::pairwise_sum;
use crate::ortho_basis::BasisSpec;
use crate::parallel::map_replicates;
use crate::process::{batch_mean, lag_moment, MomentMode, ProcessSpec};
use crate::rng::{component, derive_seed, stream};
use crate::ustat_engine::adjacent_split;

/// Probabilists' Hermite polynomial by `H_{n+1} = x H_n − n H_{n−1}`.
pub fn hermite(k: usize, x: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, x);
    if k == 0 {
        return prev;
    }
    for n in 1..k {
        let next = x * cur - n as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Multiplicities `ν_j` of a multi-index: which distinct indices occur and how often.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiplicityProfile {
    /// Distinct indices in ascending order.
    pub indices: Vec<usize>,
    /// `multiplicities[l]` is the number of occurrences of `indices[l]`.
    pub multiplicities: Vec<usize>,
}

impl MultiplicityProfile {
    pub fn new(idx: &[usize]) -> Self {
        let mut sorted = idx.to_vec();
        sorted.sort_unstable();
        let mut indices = Vec::new();
        let mut multiplicities = Vec::new();
        for run in sorted.chunk_by(|a, b| a == b) {
            indices.push(run[0]);
            multiplicities.push(run.len());
        }
        Self { indices, multiplicities }
    }

    /// `ν_j`, zero for indices that do not occur.
    pub fn nu(&self, j: usize) -> usize {
        self.indices.binary_search(&j).map_or(0, |p| self.multiplicities[p])
    }

    pub fn total(&self) -> usize {
        self.multiplicities.iter().sum()
    }

    /// `Π_l H_{r_l}(τ_{j_l})`; `tau[k - 1]` holds `τ_k`.
    pub fn hermite_product(&self, tau: &[f64]) -> f64 {
        self.indices
            .iter()
            .zip(&self.multiplicities)
            .map(|(&j, &r)| hermite(r, tau[j - 1]))
            .product()
    }
}

/// Truncated covariance `Σ_{kl} = E τ_k τ_l` of the Gaussian limit.
#[derive(Debug, Clone, Serialize)]
pub struct CovarianceModel {
    dim: usize,
    /// Row-major `dim × dim`, after repair.
    matrix: Vec<f64>,
    /// Per-entry Monte Carlo standard errors when estimated from a path.
    stderr: Option<Vec<f64>>,
    psd_repaired: bool,
    repair_magnitude: f64,
    #[serde(skip)]
    factor: Vec<f64>,
}

impl CovarianceModel {
    /// Builds a model from a symmetric matrix, clipping negative eigenvalues
    /// to zero and factoring the result.
    pub fn from_matrix(dim: usize, matrix: Vec<f64>) -> Result<Self> {
        if matrix.len() != dim * dim {
            return Err(Error::Factorization(format!("expected {} entries, got {}", dim * dim, matrix.len())));
        }
        for k in 0..dim {
            for l in 0..k {
                if matrix[k * dim + l] != matrix[l * dim + k] {
                    return Err(Error::Factorization(format!("matrix is not symmetric at ({k}, {l})")));
                }
            }
        }
        let (matrix, psd_repaired, repair_magnitude) = repair_psd(dim, matrix);
        let factor = semidefinite_cholesky(dim, &matrix)?;
        Ok(Self { dim, matrix, stderr: None, psd_repaired, repair_magnitude, factor })
    }

    /// `scale · I`.
    pub fn scaled_identity(dim: usize, scale: f64) -> Result<Self> {
        let mut m = vec![0.0; dim * dim];
        for k in 0..dim {
            m[k * dim + k] = scale;
        }
        Self::from_matrix(dim, m)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `Σ_{kl}` with 1-based basis indices.
    pub fn entry(&self, k: usize, l: usize) -> f64 {
        self.matrix[(k - 1) * self.dim + (l - 1)]
    }

    pub fn stderr(&self, k: usize, l: usize) -> Option<f64> {
        self.stderr.as_ref().map(|s| s[(k - 1) * self.dim + (l - 1)])
    }

    pub fn matrix(&self) -> &[f64] {
        &self.matrix
    }

    pub fn psd_repaired(&self) -> bool {
        self.psd_repaired
    }

    pub fn repair_magnitude(&self) -> f64 {
        self.repair_magnitude
    }

    /// Dense CSV: a `dim,<N>` header line, then one comma-separated row per `k`.
    pub fn to_csv(&self) -> String {
        let mut out = format!("dim,{}\n", self.dim);
        for row in self.matrix.chunks(self.dim.max(1)) {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    /// Draws `τ_1..τ_N` for one replicate; a pure function of the key.
    pub fn sample_tau(&self, master_seed: u64, replicate: u64) -> Vec<f64> {
        let mut rng = stream(master_seed, replicate, component::TAU);
        let z: Vec<f64> = (0..self.dim).map(|_| StandardNormal.sample(&mut rng)).collect();
        (0..self.dim)
            .map(|k| {
                let row = &self.factor[k * self.dim..k * self.dim + k + 1];
                row.iter().zip(&z).map(|(a, b)| a * b).sum()
            })
            .collect()
    }
}

fn repair_psd(dim: usize, matrix: Vec<f64>) -> (Vec<f64>, bool, f64) {
    if dim == 0 {
        return (matrix, false, 0.0);
    }
    let m = DMatrix::from_row_slice(dim, dim, &matrix);
    let eig = SymmetricEigen::new(m);
    let min = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    if min >= 0.0 {
        return (matrix, false, 0.0);
    }
    let clipped = eig.eigenvalues.map(|v| v.max(0.0));
    let rebuilt = &eig.eigenvectors * DMatrix::from_diagonal(&clipped) * eig.eigenvectors.transpose();
    let mut out = vec![0.0; dim * dim];
    for k in 0..dim {
        for l in 0..dim {
            // average the two triangles so the result is exactly symmetric
            out[k * dim + l] = 0.5 * (rebuilt[(k, l)] + rebuilt[(l, k)]);
        }
    }
    (out, true, -min)
}

/// Lower-triangular `L` with `L Lᵀ = A` for positive semidefinite `A`;
/// pivots that vanish to rounding get a zero column.
fn semidefinite_cholesky(dim: usize, a: &[f64]) -> Result<Vec<f64>> {
    let scale = (0..dim).map(|k| a[k * dim + k].abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let zero_tol = 1e-12 * scale;
    let mut l = vec![0.0f64; dim * dim];
    for j in 0..dim {
        let d = a[j * dim + j] - (0..j).map(|k| l[j * dim + k].powi(2)).sum::<f64>();
        if d < -1e-8 * scale {
            return Err(Error::Factorization(format!("negative pivot {d:e} at column {j}")));
        }
        if d <= zero_tol {
            continue;
        }
        let pivot = d.sqrt();
        l[j * dim + j] = pivot;
        for i in j + 1..dim {
            let s = a[i * dim + j] - (0..j).map(|k| l[i * dim + k] * l[j * dim + k]).sum::<f64>();
            l[i * dim + j] = s / pivot;
        }
    }
    Ok(l)
}

/// Limit covariance of the first `dim` normalized basis sums, with lag
/// moments summed up to `max_lag`.
pub fn build_covariance(
    process: &ProcessSpec,
    basis: &BasisSpec,
    dim: usize,
    max_lag: usize,
    mode: MomentMode,
) -> Result<CovarianceModel> {
    if dim > basis.max_index {
        return Err(Error::IndexOutOfRange { index: dim, max_index: basis.max_index });
    }
    match mode {
        MomentMode::Analytic => {
            let mut m = vec![0.0; dim * dim];
            for k in 1..=dim {
                for l in k..=dim {
                    let mut terms = vec![lag_moment(process, basis, k, l, 0, mode)?.value];
                    for j in 1..=max_lag {
                        terms.push(lag_moment(process, basis, k, l, j, mode)?.value);
                        terms.push(lag_moment(process, basis, l, k, j, mode)?.value);
                    }
                    let v = pairwise_sum(&terms);
                    m[(k - 1) * dim + (l - 1)] = v;
                    m[(l - 1) * dim + (k - 1)] = v;
                }
            }
            CovarianceModel::from_matrix(dim, m)
        }
        MomentMode::MonteCarlo { path_len } => {
            if basis.marginal() != process.marginal {
                return Err(Error::Unsupported("basis and process marginals differ".into()));
            }
            let path = process.sample_path(path_len + max_lag, 0);
            let mut e = vec![vec![0.0; path.len()]; dim];
            let mut row = vec![0.0; dim];
            for (i, &x) in path.iter().enumerate() {
                basis.eval_all_into(x, &mut row);
                for k in 0..dim {
                    e[k][i] = row[k];
                }
            }
            let mut m = vec![0.0; dim * dim];
            let mut se = vec![0.0; dim * dim];
            for k in 0..dim {
                for l in k..dim {
                    let z: Vec<f64> = (0..path_len)
                        .map(|i| {
                            let mut v = e[k][i] * e[l][i];
                            for j in 1..=max_lag {
                                v += e[k][i] * e[l][i + j] + e[l][i] * e[k][i + j];
                            }
                            v
                        })
                        .collect();
                    let est = batch_mean(&z);
                    for (a, b) in [(k, l), (l, k)] {
                        m[a * dim + b] = est.value;
                        se[a * dim + b] = est.stderr;
                    }
                }
            }
            let mut model = CovarianceModel::from_matrix(dim, m)?;
            model.stderr = Some(se);
            Ok(model)
        }
    }
}

fn check_dims(kernel: &KernelSpec, tau: &[f64], trunc: usize) -> Result<()> {
    if tau.len() < trunc {
        return Err(Error::IndexOutOfRange { index: trunc, max_index: tau.len() });
    }
    if trunc > kernel.basis().max_index {
        return Err(Error::IndexOutOfRange { index: trunc, max_index: kernel.basis().max_index });
    }
    Ok(())
}

fn shell_sum<F: Fn(&MultiIndex) -> f64>(kernel: &KernelSpec, trunc: usize, term: F) -> f64 {
    let vals: Vec<f64> = kernel.terms_by_shell(trunc).iter().map(|(idx, c)| c * term(idx)).collect();
    pairwise_sum(&vals)
}

/// `Σ_{max i ≤ N} f_i Π_j H_{ν_j(i)}(τ_j)` for a given `τ`.
pub fn limit_u_from_tau(kernel: &KernelSpec, tau: &[f64], trunc: usize) -> Result<f64> {
    if !kernel.summable_abs() {
        return Err(Error::NonSummable);
    }
    check_dims(kernel, tau, trunc)?;
    Ok(shell_sum(kernel, trunc, |idx| MultiplicityProfile::new(idx).hermite_product(tau)))
}

/// `Σ_{max i ≤ N} f_i τ_{i_1}⋯τ_{i_m}` for a given `τ`.
pub fn limit_v_from_tau(kernel: &KernelSpec, tau: &[f64], trunc: usize) -> Result<f64> {
    if !kernel.summable_abs() {
        return Err(Error::NonSummable);
    }
    check_dims(kernel, tau, trunc)?;
    Ok(shell_sum(kernel, trunc, |idx| idx.iter().map(|&i| tau[i - 1]).product()))
}

/// One draw from the U-statistic limit law.
pub fn limit_u_sample(kernel: &KernelSpec, model: &CovarianceModel, trunc: usize, seed: u64, replicate: u64) -> Result<f64> {
    limit_u_from_tau(kernel, &model.sample_tau(seed, replicate), trunc)
}

/// One draw from the V-statistic limit law.
pub fn limit_v_sample(kernel: &KernelSpec, model: &CovarianceModel, trunc: usize, seed: u64, replicate: u64) -> Result<f64> {
    limit_v_from_tau(kernel, &model.sample_tau(seed, replicate), trunc)
}

fn eigen_lambdas(kernel: &KernelSpec, trunc: usize) -> Result<Vec<f64>> {
    if kernel.order() != 2 {
        return Err(Error::Unsupported("eigen-series laws need an order-2 kernel".into()));
    }
    let e = kernel
        .eigen_series()
        .ok_or_else(|| Error::Unsupported("eigen-series laws need an eigen-series kernel".into()))?;
    Ok((1..=trunc).map(|k| e.lambda(k)).collect())
}

/// `Σ_{k≤N} λ_k (τ_k² − 1)`: the law obtained by substituting dependent
/// observations into the eigen-expansion as if they were independent.
pub fn series_substitution_from_tau(kernel: &KernelSpec, tau: &[f64], trunc: usize) -> Result<f64> {
    check_dims(kernel, tau, trunc)?;
    let lambdas = eigen_lambdas(kernel, trunc)?;
    let vals: Vec<f64> = lambdas.iter().zip(tau).map(|(l, t)| l * (t * t - 1.0)).collect();
    Ok(pairwise_sum(&vals))
}

pub fn series_substitution_sample(
    kernel: &KernelSpec,
    model: &CovarianceModel,
    trunc: usize,
    seed: u64,
    replicate: u64,
) -> Result<f64> {
    series_substitution_from_tau(kernel, &model.sample_tau(seed, replicate), trunc)
}

/// `Σ_{k≤N} λ_k (τ_k² − Σ_kk)`: the limit of the distance-≥2 remainder of
/// an order-2 U-statistic over a 1-dependent sequence. Converges whenever
/// `Σ λ_k² < ∞`, so non-summable eigenvalues are allowed.
pub fn remainder_limit_from_tau(kernel: &KernelSpec, model: &CovarianceModel, tau: &[f64], trunc: usize) -> Result<f64> {
    check_dims(kernel, tau, trunc)?;
    let lambdas = eigen_lambdas(kernel, trunc)?;
    let vals: Vec<f64> = lambdas
        .iter()
        .enumerate()
        .map(|(i, l)| l * (tau[i] * tau[i] - model.entry(i + 1, i + 1)))
        .collect();
    Ok(pairwise_sum(&vals))
}

pub fn remainder_limit_sample(
    kernel: &KernelSpec,
    model: &CovarianceModel,
    trunc: usize,
    seed: u64,
    replicate: u64,
) -> Result<f64> {
    remainder_limit_from_tau(kernel, model, &model.sample_tau(seed, replicate), trunc)
}

/// `E f(Y, Y) / 2`: the almost-sure limit of the adjacent-pair term
/// `(2/n) Σ f(X_i, X_{i+1})` for the shift process, where neighbours
/// coincide with probability 1/4. The diagonal override, if any, is used.
pub fn coincidence_offset(kernel: &KernelSpec, trunc: usize) -> Result<f64> {
    if kernel.order() != 2 {
        return Err(Error::Unsupported("coincidence offset is defined for order 2".into()));
    }
    if !kernel.summable_abs() && kernel.diagonal_override().is_none() {
        return Err(Error::NonSummable);
    }
    let marginal = kernel.basis().marginal();
    let diag = marginal.expect(|t| kernel.eval(&[t, t], trunc).unwrap_or(f64::NAN), trunc)?;
    if diag.is_nan() {
        return Err(Error::IndexOutOfRange { index: trunc, max_index: kernel.basis().max_index });
    }
    Ok(diag / 2.0)
}

/// `E f(Y,Y)/2 + Σ_{k≤N} λ_k(τ_k² − Σ_kk)`: the U-statistic limit for the
/// shift process when the kernel's diagonal values are arbitrary.
pub fn coincidence_limit_sample(
    kernel: &KernelSpec,
    model: &CovarianceModel,
    trunc: usize,
    seed: u64,
    replicate: u64,
) -> Result<f64> {
    let offset = coincidence_offset(kernel, trunc)?;
    Ok(offset + remainder_limit_sample(kernel, model, trunc, seed, replicate)?)
}

/// Per-`n` medians of the divergence experiment.
#[derive(Debug, Clone, Serialize)]
pub struct DivergenceRow {
    pub n: usize,
    pub median_u: f64,
    pub median_adjacent: f64,
    pub median_remainder: f64,
}

#[derive(Debug, Clone)]
pub struct DivergenceTable {
    pub rows: Vec<DivergenceRow>,
    /// Replicate values of the adjacent-pair term, one vector per grid point.
    pub adjacent_samples: Vec<Vec<f64>>,
    /// Replicate values of the distance-≥2 remainder, one vector per grid point.
    pub remainder_samples: Vec<Vec<f64>>,
}

impl DivergenceTable {
    pub fn adjacent_strictly_increasing(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].median_adjacent > w[0].median_adjacent)
    }

    /// `median_adjacent(last n) / median_adjacent(first n)`.
    pub fn adjacent_growth_ratio(&self) -> f64 {
        match (self.rows.first(), self.rows.last()) {
            (Some(a), Some(b)) => b.median_adjacent / a.median_adjacent,
            _ => f64::NAN,
        }
    }
}

pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let h = v.len() / 2;
    if v.len() % 2 == 1 {
        v[h]
    } else {
        0.5 * (v[h - 1] + v[h])
    }
}

/// For each `n` in the grid, the medians over `replicates` paths of `U_n`,
/// of its adjacent-pair term and of its remainder. Paths for grid point `n`
/// come from the seed `derive_seed(process.master_seed, n)`.
pub fn divergence_table(
    n_grid: &[usize],
    kernel: &KernelSpec,
    process: &ProcessSpec,
    replicates: usize,
    trunc: usize,
) -> Result<DivergenceTable> {
    let mut rows = Vec::new();
    let mut adjacent_samples = Vec::new();
    let mut remainder_samples = Vec::new();
    for &n in n_grid {
        let p = process.with_seed(derive_seed(process.master_seed, n as u64));
        let splits: Vec<_> = map_replicates(replicates, |r| adjacent_split(kernel, &p.sample_path(n, r), trunc))
            .into_iter()
            .collect::<Result<_>>()?;
        let adj: Vec<f64> = splits.iter().map(|s| s.adjacent).collect();
        let rem: Vec<f64> = splits.iter().map(|s| s.remainder).collect();
        let tot: Vec<f64> = splits.iter().map(|s| s.total()).collect();
        rows.push(DivergenceRow {
            n,
            median_u: median(&tot),
            median_adjacent: median(&adj),
            median_remainder: median(&rem),
        });
        adjacent_samples.push(adj);
        remainder_samples.push(rem);
    }
    Ok(DivergenceTable { rows, adjacent_samples, remainder_samples })
}
