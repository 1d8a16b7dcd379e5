//! Evaluation of `V_n`, `U_n` and `U⁰_n`.
//!
//! The naive evaluators enumerate index tuples and exist as oracles. The
//! factored evaluators expand the kernel over its coefficients and rewrite
//! each distinct-index sum `Σ_{j_1≠⋯≠j_m} Π_l a^{(l)}_{j_l}` as a signed sum
//! over set partitions of `{1..m}` of products of block power sums
//! `Σ_j Π_{l∈B} a^{(l)}_j` (Möbius inversion on the partition lattice). The
//! cost drops from `O(n^m)` to `O(#coeffs · Bell(m) · n)`.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::kernel::{KernelSpec, MultiIndex, MAX_ENUMERATED_ORDER};
use crate::numerics::{pairwise_sum, pairwise_sum_by, CompensatedSum};

/// Work budget of the naive evaluators.
pub const NAIVE_WORK_LIMIT: f64 = 1e8;

/// One set partition of `{0..m-1}` with its Möbius weight
/// `Π_B (−1)^{|B|−1}(|B|−1)!`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionTerm {
    pub blocks: Vec<Vec<usize>>,
    pub weight: i64,
}

/// All `Bell(m)` partitions of `{0..m-1}`, finest first.
pub fn enumerate_partitions(m: usize) -> Result<Vec<PartitionTerm>> {
    if m > MAX_ENUMERATED_ORDER {
        return Err(Error::OrderTooLarge { order: m, max: MAX_ENUMERATED_ORDER });
    }
    // restricted growth strings: a[0] = 0, a[i] <= 1 + max(a[..i])
    fn rec(a: &mut Vec<usize>, m: usize, out: &mut Vec<Vec<usize>>) {
        if a.len() == m {
            out.push(a.clone());
            return;
        }
        let top = a.iter().max().map_or(0, |&x| x + 1);
        for v in 0..=top {
            a.push(v);
            rec(a, m, out);
            a.pop();
        }
    }
    let mut strings = Vec::new();
    if m > 0 {
        rec(&mut Vec::with_capacity(m), m, &mut strings);
    } else {
        strings.push(Vec::new());
    }
    let mut terms: Vec<PartitionTerm> = strings
        .into_iter()
        .map(|s| {
            let count = s.iter().max().map_or(0, |&x| x + 1);
            let mut blocks = vec![Vec::new(); count];
            for (i, &b) in s.iter().enumerate() {
                blocks[b].push(i);
            }
            let weight = blocks
                .iter()
                .map(|b| {
                    let size = b.len() as i64;
                    let fact: i64 = (1..size).product();
                    if size % 2 == 1 {
                        fact
                    } else {
                        -fact
                    }
                })
                .product();
            PartitionTerm { blocks, weight }
        })
        .collect();
    terms.sort_by(|a, b| b.blocks.len().cmp(&a.blocks.len()).then_with(|| a.blocks.cmp(&b.blocks)));
    Ok(terms)
}

/// Basis values `e_k(X_j)` for `k = 1..=trunc`, stored column by column.
#[derive(Debug, Clone)]
pub struct BasisMatrix {
    n: usize,
    trunc: usize,
    columns: Vec<f64>,
}

impl BasisMatrix {
    pub fn new(kernel: &KernelSpec, path: &[f64], trunc: usize) -> Result<Self> {
        let basis = kernel.basis();
        if trunc > basis.max_index {
            return Err(Error::IndexOutOfRange { index: trunc, max_index: basis.max_index });
        }
        let marginal = basis.marginal();
        let n = path.len();
        let mut columns = vec![0.0; n * trunc];
        let mut row = vec![0.0; trunc];
        for (j, &x) in path.iter().enumerate() {
            marginal.check(x)?;
            basis.eval_all_into(x, &mut row);
            for (k, &v) in row.iter().enumerate() {
                columns[k * n + j] = v;
            }
        }
        Ok(Self { n, trunc, columns })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Column `e_k(X_1..X_n)` (`k >= 1`).
    pub fn column(&self, k: usize) -> &[f64] {
        debug_assert!(k >= 1 && k <= self.trunc);
        &self.columns[(k - 1) * self.n..k * self.n]
    }
}

/// Memoized block power sums `S_B = n^{-|B|/2} Σ_j Π_{l∈B} e_{i_l}(X_j)`.
///
/// Keys are sorted multisets of basis indices, so blocks with the same
/// content share one evaluation.
#[derive(Debug)]
pub struct PowerSumTable<'a> {
    matrix: &'a BasisMatrix,
    raw: HashMap<Vec<usize>, f64>,
}

impl<'a> PowerSumTable<'a> {
    pub fn new(matrix: &'a BasisMatrix) -> Self {
        Self { matrix, raw: HashMap::new() }
    }

    /// Unnormalized `Σ_j Π_{k∈content} e_k(X_j)`.
    pub fn raw(&mut self, content: &[usize]) -> f64 {
        let mut key = content.to_vec();
        key.sort_unstable();
        if let Some(&v) = self.raw.get(&key) {
            return v;
        }
        let cols: Vec<&[f64]> = key.iter().map(|&k| self.matrix.column(k)).collect();
        let v = pairwise_sum_by(self.matrix.len(), &|j| cols.iter().map(|c| c[j]).product::<f64>());
        self.raw.insert(key, v);
        v
    }

    /// `n^{-|B|/2}`-normalized power sum.
    pub fn normalized(&mut self, content: &[usize]) -> f64 {
        let n = self.matrix.len() as f64;
        self.raw(content) * n.powf(-(content.len() as f64) / 2.0)
    }
}

fn naive_guard(n: usize, m: usize) -> Result<()> {
    let work = (n as f64).powi(m as i32);
    if work > NAIVE_WORK_LIMIT {
        Err(Error::SizeGuard { work })
    } else {
        Ok(())
    }
}

/// Visits every m-tuple over `0..n` in lexicographic order.
fn for_each_tuple<F: FnMut(&[usize]) -> Result<()>>(n: usize, m: usize, mut f: F) -> Result<()> {
    if n == 0 {
        return Ok(());
    }
    let mut idx = vec![0usize; m];
    loop {
        f(&idx)?;
        let mut pos = m;
        loop {
            if pos == 0 {
                return Ok(());
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < n {
                break;
            }
            idx[pos] = 0;
        }
    }
}

fn gather(path: &[f64], idx: &[usize], buf: &mut Vec<f64>) {
    buf.clear();
    buf.extend(idx.iter().map(|&j| path[j]));
}

/// `n^{-m/2} Σ_{all tuples} f(X_{j_1}..X_{j_m})` by enumeration.
pub fn v_stat_naive(kernel: &KernelSpec, path: &[f64], trunc: usize) -> Result<f64> {
    let (n, m) = (path.len(), kernel.order());
    naive_guard(n, m)?;
    let mut acc = CompensatedSum::default();
    let mut pts = Vec::with_capacity(m);
    for_each_tuple(n, m, |idx| {
        gather(path, idx, &mut pts);
        acc.add(kernel.eval(&pts, trunc)?);
        Ok(())
    })?;
    Ok(acc.value() * (n as f64).powf(-(m as f64) / 2.0))
}

/// `n^{-m/2} Σ_{pairwise distinct} f(X_{j_1}..X_{j_m})` by enumeration.
pub fn u_stat_naive(kernel: &KernelSpec, path: &[f64], trunc: usize) -> Result<f64> {
    let (n, m) = (path.len(), kernel.order());
    naive_guard(n, m)?;
    if n < m {
        return Ok(0.0);
    }
    let mut acc = CompensatedSum::default();
    let mut pts = Vec::with_capacity(m);
    for_each_tuple(n, m, |idx| {
        let distinct = (0..m).all(|a| (a + 1..m).all(|b| idx[a] != idx[b]));
        if distinct {
            gather(path, idx, &mut pts);
            acc.add(kernel.eval(&pts, trunc)?);
        }
        Ok(())
    })?;
    Ok(acc.value() * (n as f64).powf(-(m as f64) / 2.0))
}

/// `n^{-m/2} Σ_{j_1<⋯<j_m} f_0(X_{j_1}..X_{j_m})` by enumeration.
///
/// The kernel must already be symmetric unless `auto_symmetrize` is set, in
/// which case `f_0 = symmetrize(f)` and the result equals `U_n(f)`.
pub fn u0_stat_naive(kernel: &KernelSpec, path: &[f64], trunc: usize, auto_symmetrize: bool) -> Result<f64> {
    let symmetrized;
    let f0 = if kernel.is_symmetric() && !auto_symmetrize {
        kernel
    } else if auto_symmetrize {
        symmetrized = kernel.symmetrize()?;
        &symmetrized
    } else {
        return Err(Error::AsymmetricKernel);
    };
    let (n, m) = (path.len(), kernel.order());
    naive_guard(n, m)?;
    if n < m {
        return Ok(0.0);
    }
    let mut acc = CompensatedSum::default();
    let mut pts = Vec::with_capacity(m);
    for_each_tuple(n, m, |idx| {
        if idx.windows(2).all(|w| w[0] < w[1]) {
            gather(path, idx, &mut pts);
            acc.add(f0.eval(&pts, trunc)?);
        }
        Ok(())
    })?;
    Ok(acc.value() * (n as f64).powf(-(m as f64) / 2.0))
}

/// Decomposition `U_n = (1/n) Σ_{|i−j|=1} f(X_i, X_j) + Ũ_n` for order 2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdjacentSplit {
    /// `(1/n) Σ_{i} [f(X_i, X_{i+1}) + f(X_{i+1}, X_i)]`, evaluated with the
    /// diagonal override when neighbours coincide.
    pub adjacent: f64,
    /// `(1/n) Σ_{|i−j|≥2} f(X_i, X_j)` through the series.
    pub remainder: f64,
}

impl AdjacentSplit {
    pub fn total(&self) -> f64 {
        self.adjacent + self.remainder
    }
}

/// Fails when two observations at distance at least 2 coincide; the split
/// evaluates those pairs by the series and would miss a diagonal override.
fn check_no_distant_ties(path: &[f64]) -> Result<()> {
    let mut order: Vec<usize> = (0..path.len()).collect();
    order.sort_by(|&a, &b| path[a].total_cmp(&path[b]).then(a.cmp(&b)));
    for run in order.chunk_by(|&a, &b| path[a] == path[b]) {
        if run.len() > 1 && run.windows(2).any(|w| w[1] - w[0] >= 2) {
            return Err(Error::Unsupported(
                "diagonal override with coinciding observations at distance >= 2".into(),
            ));
        }
    }
    Ok(())
}

/// Order-2 split into the adjacent-pair term and the distance-≥2 remainder.
pub fn adjacent_split(kernel: &KernelSpec, path: &[f64], trunc: usize) -> Result<AdjacentSplit> {
    if kernel.order() != 2 {
        return Err(Error::Unsupported("adjacent split is defined for order-2 kernels".into()));
    }
    let n = path.len();
    if n < 2 {
        return Ok(AdjacentSplit { adjacent: 0.0, remainder: 0.0 });
    }
    if kernel.diagonal_override().is_some() {
        check_no_distant_ties(path)?;
    }
    let matrix = BasisMatrix::new(kernel, path, trunc)?;
    let terms = kernel.terms(trunc);
    let nf = n as f64;

    let pair_value = |i: usize, j: usize| -> f64 {
        if let Some(v) = kernel.diagonal_override() {
            if path[i] == path[j] {
                return v;
            }
        }
        let vals: Vec<f64> = terms
            .iter()
            .map(|(idx, c)| c * matrix.column(idx[0])[i] * matrix.column(idx[1])[j])
            .collect();
        pairwise_sum(&vals)
    };
    let adjacent = pairwise_sum_by(n - 1, &|i| pair_value(i, i + 1) + pair_value(i + 1, i)) / nf;

    let mut sums = PowerSumTable::new(&matrix);
    let contributions: Vec<f64> = terms
        .iter()
        .map(|(idx, c)| {
            let (a, b) = (idx[0], idx[1]);
            let (ca, cb) = (matrix.column(a), matrix.column(b));
            let lag_ab = pairwise_sum_by(n - 1, &|i| ca[i] * cb[i + 1]);
            let lag_ba = pairwise_sum_by(n - 1, &|i| cb[i] * ca[i + 1]);
            let full = sums.raw(&[a]) * sums.raw(&[b]);
            c * (full - sums.raw(&[a, b]) - lag_ab - lag_ba)
        })
        .collect();
    let remainder = pairwise_sum(&contributions) / nf;
    Ok(AdjacentSplit { adjacent, remainder })
}

fn require_series(kernel: &KernelSpec) -> Result<()> {
    if kernel.order() > MAX_ENUMERATED_ORDER {
        return Err(Error::OrderTooLarge { order: kernel.order(), max: MAX_ENUMERATED_ORDER });
    }
    Ok(())
}

fn override_route(kernel: &KernelSpec) -> Result<()> {
    if kernel.order() != 2 {
        return Err(Error::Unsupported("diagonal overrides are factored only for order 2".into()));
    }
    if kernel.basis().marginal().is_discrete() {
        return Err(Error::Unsupported("diagonal overrides are factored only for atomless marginals".into()));
    }
    Ok(())
}

/// `U_n` through the partition expansion. Order-2 kernels with a diagonal
/// override go through [`adjacent_split`] instead.
pub fn u_stat_factored(kernel: &KernelSpec, path: &[f64], trunc: usize) -> Result<f64> {
    require_series(kernel)?;
    let (n, m) = (path.len(), kernel.order());
    if n < m {
        return Ok(0.0);
    }
    if kernel.diagonal_override().is_some() {
        override_route(kernel)?;
        return Ok(adjacent_split(kernel, path, trunc)?.total());
    }
    let partitions = enumerate_partitions(m)?;
    let matrix = BasisMatrix::new(kernel, path, trunc)?;
    let mut sums = PowerSumTable::new(&matrix);
    let contributions: Vec<f64> = kernel
        .terms(trunc)
        .iter()
        .map(|(idx, c)| c * distinct_index_sum(idx, &partitions, &mut sums))
        .collect();
    Ok(pairwise_sum(&contributions))
}

/// `n^{-m/2} Σ_{distinct} Π_l e_{idx_l}(X_{j_l})` from normalized block sums.
fn distinct_index_sum(idx: &MultiIndex, partitions: &[PartitionTerm], sums: &mut PowerSumTable) -> f64 {
    let mut content = Vec::with_capacity(idx.len());
    partitions
        .iter()
        .map(|p| {
            let prod: f64 = p
                .blocks
                .iter()
                .map(|block| {
                    content.clear();
                    content.extend(block.iter().map(|&l| idx[l]));
                    sums.normalized(&content)
                })
                .product();
            p.weight as f64 * prod
        })
        .sum()
}

/// `V_n = Σ f_i Π_l (n^{-1/2} Σ_j e_{i_l}(X_j))`. With a diagonal override
/// (order 2) this is `U_n` plus the override value.
pub fn v_stat_factored(kernel: &KernelSpec, path: &[f64], trunc: usize) -> Result<f64> {
    require_series(kernel)?;
    let n = path.len();
    if n == 0 {
        return Ok(0.0);
    }
    if let Some(v) = kernel.diagonal_override() {
        override_route(kernel)?;
        return Ok(adjacent_split(kernel, path, trunc)?.total() + v);
    }
    let matrix = BasisMatrix::new(kernel, path, trunc)?;
    let mut sums = PowerSumTable::new(&matrix);
    let contributions: Vec<f64> = kernel
        .terms(trunc)
        .iter()
        .map(|(idx, c)| idx.iter().fold(*c, |acc, &k| acc * sums.normalized(&[k])))
        .collect();
    Ok(pairwise_sum(&contributions))
}

/// `U⁰_n(f_0)` for the symmetrized kernel `f_0`, equal to `U_n(f)`.
/// Symmetric input is used as `f_0` directly; asymmetric input requires
/// `auto_symmetrize`.
pub fn u0_stat_factored(kernel: &KernelSpec, path: &[f64], trunc: usize, auto_symmetrize: bool) -> Result<f64> {
    let m = kernel.order();
    require_series(kernel)?;
    let fact: f64 = (1..=m).product::<usize>() as f64;
    if kernel.is_symmetric() && !auto_symmetrize {
        // Σ_{ordered} f_0 = Σ_{distinct} f_0 / m!
        Ok(u_stat_factored(kernel, path, trunc)? / fact)
    } else if auto_symmetrize {
        u_stat_factored(kernel, path, trunc)
    } else {
        Err(Error::AsymmetricKernel)
    }
}
