//! Stationary sequence generators with known marginals and analytic mixing
//! profiles.
//!
//! `OneDependentShift` sets `X_i = Y_{i+ξ_i}` with `{Y_i}` iid from the
//! marginal and `{ξ_i}` iid fair 0/1 coins. Neighbours coincide with
//! probability 1/4 (`ξ_i = 1, ξ_{i+1} = 0`), observations two or more apart
//! are independent.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::pairwise_sum_by;
use crate::ortho_basis::{BasisSpec, MarginalLaw};
use crate::rng::{component, stream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProcessKind {
    Iid,
    OneDependentShift,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ProcessSpec {
    pub kind: ProcessKind,
    pub marginal: MarginalLaw,
    pub master_seed: u64,
}

/// Draws one value from `law`.
pub fn sample_marginal<R: Rng + ?Sized>(law: MarginalLaw, rng: &mut R) -> f64 {
    match law {
        MarginalLaw::UniformSymmetric => 2.0 * rng.random::<f64>() - 1.0,
        MarginalLaw::SignedGeometric => {
            // inverse CDF of P(K = k) = 2^{-k} on u in (0, 1]
            let u = 1.0 - rng.random::<f64>();
            let k = (-u.log2()).ceil().max(1.0);
            if rng.random::<bool>() {
                k
            } else {
                -k
            }
        }
    }
}

impl ProcessSpec {
    pub fn new(kind: ProcessKind, marginal: MarginalLaw, master_seed: u64) -> Self {
        Self { kind, marginal, master_seed }
    }

    pub fn with_seed(self, master_seed: u64) -> Self {
        Self { master_seed, ..self }
    }

    /// Dependence range: observations more than this far apart are independent.
    pub fn dependence_range(&self) -> usize {
        match self.kind {
            ProcessKind::Iid => 0,
            ProcessKind::OneDependentShift => 1,
        }
    }

    /// Path `X_1..X_n` for one replicate; a pure function of
    /// `(master_seed, replicate)`.
    pub fn sample_path(&self, n: usize, replicate: u64) -> Vec<f64> {
        let mut values = stream(self.master_seed, replicate, component::PATH_VALUES);
        match self.kind {
            ProcessKind::Iid => (0..n).map(|_| sample_marginal(self.marginal, &mut values)).collect(),
            ProcessKind::OneDependentShift => {
                let y: Vec<f64> = (0..=n).map(|_| sample_marginal(self.marginal, &mut values)).collect();
                let mut shifts = stream(self.master_seed, replicate, component::PATH_SHIFTS);
                (0..n).map(|i| y[i + usize::from(shifts.random::<bool>())]).collect()
            }
        }
    }

    /// Mixing profile in closed form.
    pub fn mixing_profile(&self) -> MixingProfile {
        MixingProfile { range: self.dependence_range() }
    }
}

/// Value of a mixing coefficient at a given lag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MixingValue {
    Exact(f64),
    /// Only an upper bound is available.
    AtMost(f64),
    Infinite,
}

impl MixingValue {
    pub fn is_zero(self) -> bool {
        self == MixingValue::Exact(0.0)
    }
}

/// Mixing coefficients of an `r`-dependent sequence: zero from lag `r + 1` on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixingProfile {
    range: usize,
}

impl MixingProfile {
    pub fn dependence_range(&self) -> usize {
        self.range
    }

    pub fn alpha(&self, lag: usize) -> MixingValue {
        if lag > self.range {
            MixingValue::Exact(0.0)
        } else {
            MixingValue::AtMost(0.25)
        }
    }

    pub fn phi(&self, lag: usize) -> MixingValue {
        if lag > self.range {
            MixingValue::Exact(0.0)
        } else {
            MixingValue::AtMost(1.0)
        }
    }

    /// Within the dependence range neighbours coincide with positive
    /// probability on atoms of vanishing mass, so the ratio is unbounded.
    pub fn psi(&self, lag: usize) -> MixingValue {
        if lag > self.range {
            MixingValue::Exact(0.0)
        } else {
            MixingValue::Infinite
        }
    }

    /// `Σ_k φ(k)^{1/2} < ∞`, which holds for every finite-range profile.
    pub fn phi_sqrt_summable(&self) -> bool {
        true
    }
}

/// A lag moment with its Monte Carlo standard error (zero on analytic paths).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LagMoment {
    pub value: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MomentMode {
    Analytic,
    MonteCarlo { path_len: usize },
}

/// `E e_k(X_1) e_l(X_{1+lag})`.
///
/// Analytic values: lag 0 gives `δ_kl`; for the shift process lag 1 gives
/// `δ_kl / 4` (only the coincidence event contributes); every larger lag and
/// every positive lag of an iid sequence gives 0.
pub fn lag_moment(
    process: &ProcessSpec,
    basis: &BasisSpec,
    k: usize,
    l: usize,
    lag: usize,
    mode: MomentMode,
) -> Result<LagMoment> {
    if basis.marginal() != process.marginal {
        return Err(Error::Unsupported(format!(
            "basis {} is orthonormal for {}, process marginal is {}",
            basis.family.name(),
            basis.marginal().name(),
            process.marginal.name()
        )));
    }
    for idx in [k, l] {
        if idx > basis.max_index {
            return Err(Error::IndexOutOfRange { index: idx, max_index: basis.max_index });
        }
    }
    match mode {
        MomentMode::Analytic => {
            let same = if k == l { 1.0 } else { 0.0 };
            let value = match (lag, process.kind) {
                (0, _) => same,
                (1, ProcessKind::OneDependentShift) => {
                    if k == 0 && l == 0 {
                        1.0
                    } else {
                        same / 4.0
                    }
                }
                _ if k == 0 && l == 0 => 1.0,
                _ => 0.0,
            };
            Ok(LagMoment { value, stderr: 0.0 })
        }
        MomentMode::MonteCarlo { path_len } => {
            if path_len < 2 {
                return Err(Error::Unsupported("Monte Carlo lag moment needs path_len >= 2".into()));
            }
            let path = process.sample_path(path_len + lag, 0);
            let ek: Vec<f64> = path.iter().map(|&x| basis.eval(k, x)).collect::<Result<_>>()?;
            let el: Vec<f64> = path.iter().map(|&x| basis.eval(l, x)).collect::<Result<_>>()?;
            let z: Vec<f64> = (0..path_len).map(|i| ek[i] * el[i + lag]).collect();
            Ok(batch_mean(&z))
        }
    }
}

/// Mean with a batch-means standard error (robust to short-range dependence).
pub fn batch_mean(z: &[f64]) -> LagMoment {
    let n = z.len();
    let value = pairwise_sum_by(n, &|i| z[i]) / n as f64;
    let batches = (n / 500).clamp(2, 200).min(n);
    let size = n / batches;
    let means: Vec<f64> = (0..batches)
        .map(|b| z[b * size..(b + 1) * size].iter().sum::<f64>() / size as f64)
        .collect();
    let grand = means.iter().sum::<f64>() / batches as f64;
    let var = means.iter().map(|m| (m - grand).powi(2)).sum::<f64>() / (batches - 1) as f64;
    LagMoment { value, stderr: (var / batches as f64).sqrt() }
}
