//! Kernels of order `m` stored as canonical coefficient tensors over a basis:
//! `f(t_1..t_m) = Σ f_{i_1..i_m} e_{i_1}(t_1)⋯e_{i_m}(t_m)` with every
//! `i_j >= 1`.
//!
//! Two storage modes exist. A sparse tensor keyed by multi-index, summed in
//! lexicographic order, and an eigen-series `f_{k,…,k} = λ_k` whose
//! eigenvalues come from a closed form. Either may carry a constant override
//! on the full diagonal `t_1 = ⋯ = t_m`.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{pairwise_sum, trigamma};
use crate::ortho_basis::{BasisFamily, BasisSpec};
use crate::process::sample_marginal;
use crate::rng::{component, stream};

pub type MultiIndex = Vec<usize>;

/// Largest order for which permutations and set partitions are enumerated.
pub const MAX_ENUMERATED_ORDER: usize = 6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EigenFormula {
    /// `λ_k = (π(k − 1/2))^{-2}`.
    Wiener,
    /// `λ_k = 1/k`; square summable but not summable.
    OneOverK,
    /// `λ_1, λ_2, …` listed explicitly; zero beyond the list.
    Explicit(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenSeries {
    pub formula: EigenFormula,
    /// Multiplies every eigenvalue (symmetrization scales by `m!`).
    pub scale: f64,
}

impl EigenSeries {
    pub fn new(formula: EigenFormula) -> Self {
        Self { formula, scale: 1.0 }
    }

    pub fn lambda(&self, k: usize) -> f64 {
        debug_assert!(k >= 1);
        let raw = match &self.formula {
            EigenFormula::Wiener => {
                let x = PI * (k as f64 - 0.5);
                1.0 / (x * x)
            }
            EigenFormula::OneOverK => 1.0 / k as f64,
            EigenFormula::Explicit(list) => list.get(k - 1).copied().unwrap_or(0.0),
        };
        self.scale * raw
    }

    pub fn summable_abs(&self) -> bool {
        !matches!(self.formula, EigenFormula::OneOverK)
    }

    /// `Σ_{k>N} |λ_k|`.
    pub fn tail(&self, n: usize) -> TailMass {
        let s = self.scale.abs();
        match &self.formula {
            EigenFormula::Wiener => TailMass::Finite(s * trigamma(n as f64 + 0.5) / (PI * PI)),
            EigenFormula::OneOverK => TailMass::Infinite,
            EigenFormula::Explicit(list) => {
                let rest: Vec<f64> = list.iter().skip(n).map(|v| v.abs()).collect();
                TailMass::Finite(s * pairwise_sum(&rest))
            }
        }
    }

    pub fn len_hint(&self) -> Option<usize> {
        match &self.formula {
            EigenFormula::Explicit(list) => Some(list.len()),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TailMass {
    Finite(f64),
    Infinite,
}

impl TailMass {
    pub fn finite(self) -> Option<f64> {
        match self {
            TailMass::Finite(v) => Some(v),
            TailMass::Infinite => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Coefficients {
    Tensor(BTreeMap<MultiIndex, f64>),
    Eigen(EigenSeries),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    order: usize,
    basis: BasisSpec,
    coeffs: Coefficients,
    diagonal_override: Option<f64>,
}

/// Monte Carlo estimate of a degeneracy defect.
#[derive(Debug, Clone, Copy)]
pub struct Defect {
    pub value: f64,
    pub stderr: f64,
}

impl KernelSpec {
    /// Sparse tensor kernel. Duplicate indices accumulate; exact zeros are dropped.
    pub fn tensor<I>(basis: BasisSpec, order: usize, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (MultiIndex, f64)>,
    {
        if order == 0 {
            return Err(Error::InvalidKernel("order must be at least 1".into()));
        }
        let mut map = BTreeMap::new();
        for (idx, c) in entries {
            if idx.len() != order {
                return Err(Error::Arity { expected: order, got: idx.len() });
            }
            if idx.contains(&0) {
                return Err(Error::InvalidKernel(format!(
                    "multi-index {idx:?} contains e_0; canonical kernels have no constant factor"
                )));
            }
            if let Some(&i) = idx.iter().find(|&&i| i > basis.max_index) {
                return Err(Error::IndexOutOfRange { index: i, max_index: basis.max_index });
            }
            if !c.is_finite() {
                return Err(Error::InvalidKernel(format!("non-finite coefficient at {idx:?}")));
            }
            *map.entry(idx).or_insert(0.0) += c;
        }
        map.retain(|_, c| *c != 0.0);
        Ok(Self { order, basis, coeffs: Coefficients::Tensor(map), diagonal_override: None })
    }

    /// Rank-diagonal kernel `Σ_k λ_k e_k(t_1)⋯e_k(t_m)`.
    pub fn eigen(basis: BasisSpec, order: usize, formula: EigenFormula) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidKernel("order must be at least 1".into()));
        }
        if let EigenFormula::Explicit(list) = &formula {
            if list.len() > basis.max_index {
                return Err(Error::IndexOutOfRange { index: list.len(), max_index: basis.max_index });
            }
            if list.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidKernel("non-finite eigenvalue".into()));
            }
        }
        Ok(Self {
            order,
            basis,
            coeffs: Coefficients::Eigen(EigenSeries::new(formula)),
            diagonal_override: None,
        })
    }

    /// `sign(ts)·min(|t|,|s|)` through its sine eigen-expansion.
    pub fn wiener(max_index: usize) -> Self {
        Self::eigen(BasisSpec::new(BasisFamily::SineWiener, max_index), 2, EigenFormula::Wiener)
            .expect("wiener kernel is well formed")
    }

    /// Sets `f(t, …, t) = value` on the full diagonal.
    pub fn with_diagonal_override(mut self, value: f64) -> Self {
        self.diagonal_override = Some(value);
        self
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn basis(&self) -> &BasisSpec {
        &self.basis
    }

    pub fn coefficients(&self) -> &Coefficients {
        &self.coeffs
    }

    pub fn diagonal_override(&self) -> Option<f64> {
        self.diagonal_override
    }

    pub fn eigen_series(&self) -> Option<&EigenSeries> {
        match &self.coeffs {
            Coefficients::Eigen(e) => Some(e),
            Coefficients::Tensor(_) => None,
        }
    }

    /// Largest stored index, if finite.
    pub fn max_stored_index(&self) -> Option<usize> {
        match &self.coeffs {
            Coefficients::Tensor(map) => Some(map.keys().flat_map(|k| k.iter().copied()).max().unwrap_or(0)),
            Coefficients::Eigen(e) => e.len_hint(),
        }
    }

    pub fn summable_abs(&self) -> bool {
        match &self.coeffs {
            Coefficients::Tensor(_) => true,
            Coefficients::Eigen(e) => e.summable_abs(),
        }
    }

    fn check_trunc(&self, trunc: usize) -> Result<()> {
        if trunc > self.basis.max_index {
            Err(Error::IndexOutOfRange { index: trunc, max_index: self.basis.max_index })
        } else {
            Ok(())
        }
    }

    /// Stored terms with every index `<= trunc`, in lexicographic order.
    pub fn terms(&self, trunc: usize) -> Vec<(MultiIndex, f64)> {
        match &self.coeffs {
            Coefficients::Tensor(map) => map
                .iter()
                .filter(|(idx, _)| idx.iter().all(|&i| i <= trunc))
                .map(|(idx, &c)| (idx.clone(), c))
                .collect(),
            Coefficients::Eigen(e) => {
                let top = e.len_hint().map_or(trunc, |l| l.min(trunc));
                (1..=top)
                    .map(|k| (vec![k; self.order], e.lambda(k)))
                    .filter(|(_, c)| *c != 0.0)
                    .collect()
            }
        }
    }

    /// Same terms ordered by ascending max-index shell, lexicographic within a shell.
    pub fn terms_by_shell(&self, trunc: usize) -> Vec<(MultiIndex, f64)> {
        let mut t = self.terms(trunc);
        t.sort_by(|(a, _), (b, _)| {
            let ma = a.iter().max();
            let mb = b.iter().max();
            ma.cmp(&mb).then_with(|| a.cmp(b))
        });
        t
    }

    /// Evaluates the truncated series at `points`, or the override when all
    /// points coincide.
    pub fn eval(&self, points: &[f64], trunc: usize) -> Result<f64> {
        if points.len() != self.order {
            return Err(Error::Arity { expected: self.order, got: points.len() });
        }
        self.check_trunc(trunc)?;
        let marginal = self.basis.marginal();
        for &p in points {
            marginal.check(p)?;
        }
        if let Some(v) = self.diagonal_override {
            if points.windows(2).all(|w| w[0] == w[1]) {
                return Ok(v);
            }
        }
        let vals: Vec<f64> = self
            .terms(trunc)
            .iter()
            .map(|(idx, c)| {
                idx.iter()
                    .zip(points)
                    .fold(*c, |acc, (&i, &t)| acc * self.basis.eval(i, t).expect("checked above"))
            })
            .collect();
        Ok(pairwise_sum(&vals))
    }

    /// `Σ_{max i > N} |f_i|`.
    pub fn tail_mass(&self, n: usize) -> TailMass {
        match &self.coeffs {
            Coefficients::Tensor(map) => {
                let rest: Vec<f64> = map
                    .iter()
                    .filter(|(idx, _)| idx.iter().any(|&i| i > n))
                    .map(|(_, c)| c.abs())
                    .collect();
                TailMass::Finite(pairwise_sum(&rest))
            }
            Coefficients::Eigen(e) => e.tail(n),
        }
    }

    /// Multiplies every coefficient (and the override) by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        let mut out = self.clone();
        match &mut out.coeffs {
            Coefficients::Tensor(map) => map.values_mut().for_each(|v| *v *= c),
            Coefficients::Eigen(e) => e.scale *= c,
        }
        out.diagonal_override = out.diagonal_override.map(|v| v * c);
        out
    }

    /// The kernel `g(t_1..t_m) = f(t_{perm[0]}, …, t_{perm[m-1]})`.
    pub fn permuted_arguments(&self, perm: &[usize]) -> Result<Self> {
        check_permutation(perm, self.order)?;
        let mut out = self.clone();
        if let Coefficients::Tensor(map) = &self.coeffs {
            // f(t_π) = Σ c_i Π_j e_{i_j}(t_{π(j)}): slot π(j) now carries index i_j.
            let permuted = map.iter().map(|(idx, &c)| {
                let mut new_idx = vec![0; idx.len()];
                for (j, &p) in perm.iter().enumerate() {
                    new_idx[p] = idx[j];
                }
                (new_idx, c)
            });
            out.coeffs = Coefficients::Tensor(permuted.collect());
        }
        Ok(out)
    }

    /// `f_0 = Σ_π f ∘ π` over all argument permutations.
    pub fn symmetrize(&self) -> Result<Self> {
        if self.order > MAX_ENUMERATED_ORDER {
            return Err(Error::OrderTooLarge { order: self.order, max: MAX_ENUMERATED_ORDER });
        }
        let perms = permutations(self.order);
        let fact = perms.len() as f64;
        let mut out = self.clone();
        match &self.coeffs {
            Coefficients::Tensor(map) => {
                let mut acc: BTreeMap<MultiIndex, f64> = BTreeMap::new();
                for (idx, &c) in map {
                    for p in &perms {
                        let permuted: MultiIndex = p.iter().map(|&j| idx[j]).collect();
                        *acc.entry(permuted).or_insert(0.0) += c;
                    }
                }
                acc.retain(|_, c| *c != 0.0);
                out.coeffs = Coefficients::Tensor(acc);
            }
            Coefficients::Eigen(e) => {
                let mut e = e.clone();
                e.scale *= fact;
                out.coeffs = Coefficients::Eigen(e);
            }
        }
        out.diagonal_override = self.diagonal_override.map(|v| v * fact);
        Ok(out)
    }

    /// True when `symmetrize(f) = m!·f` up to rounding.
    pub fn is_symmetric(&self) -> bool {
        match &self.coeffs {
            Coefficients::Eigen(_) => true,
            Coefficients::Tensor(map) => {
                if self.order > MAX_ENUMERATED_ORDER {
                    return false;
                }
                let perms = permutations(self.order);
                map.iter().all(|(idx, &c)| {
                    perms.iter().all(|p| {
                        let permuted: MultiIndex = p.iter().map(|&j| idx[j]).collect();
                        let other = map.get(&permuted).copied().unwrap_or(0.0);
                        (other - c).abs() <= 1e-12 * c.abs().max(other.abs())
                    })
                })
            }
        }
    }

    /// Monte Carlo estimate of `E[(E_{X*_slot} f(X*_1..X*_m))²]` (slot is 1-based).
    ///
    /// The outer variables are drawn iid from the marginal; the inner
    /// expectation is exact up to quadrature or tail-mass truncation.
    pub fn degeneracy_defect(&self, slot: usize, trunc: usize, draws: usize, seed: u64) -> Result<Defect> {
        self.check_trunc(trunc)?;
        degeneracy_defect_of(&self.basis, self.order, |pts| self.eval(pts, trunc), slot, draws, seed)
    }
}

/// Degeneracy defect of an arbitrary kernel `f` over `basis`'s marginal.
pub fn degeneracy_defect_of<F>(
    basis: &BasisSpec,
    order: usize,
    f: F,
    slot: usize,
    draws: usize,
    seed: u64,
) -> Result<Defect>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    if slot == 0 || slot > order {
        return Err(Error::InvalidKernel(format!("slot {slot} not in 1..={order}")));
    }
    if draws == 0 {
        return Err(Error::InvalidKernel("need at least one outer draw".into()));
    }
    let marginal = basis.marginal();
    let mut squares = Vec::with_capacity(draws);
    for r in 0..draws {
        let mut rng = stream(seed, r as u64, component::DEFECT_OUTER);
        let pts: Vec<f64> = (0..order).map(|_| sample_marginal(marginal, &mut rng)).collect();
        let inner = {
            let failure = std::cell::Cell::new(None);
            let v = marginal.expect(
                |t| {
                    let mut p = pts.clone();
                    p[slot - 1] = t;
                    f(&p).unwrap_or_else(|e| {
                        failure.set(Some(e.to_string()));
                        0.0
                    })
                },
                basis.max_index,
            )?;
            if let Some(msg) = failure.take() {
                return Err(Error::InvalidKernel(msg));
            }
            v
        };
        squares.push(inner * inner);
    }
    let mean = pairwise_sum(&squares) / draws as f64;
    let var = if draws > 1 {
        squares.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (draws - 1) as f64
    } else {
        0.0
    };
    Ok(Defect { value: mean, stderr: (var / draws as f64).sqrt() })
}

fn check_permutation(perm: &[usize], order: usize) -> Result<()> {
    let mut seen = vec![false; order];
    if perm.len() != order {
        return Err(Error::Arity { expected: order, got: perm.len() });
    }
    for &p in perm {
        if p >= order || seen[p] {
            return Err(Error::InvalidKernel(format!("{perm:?} is not a permutation")));
        }
        seen[p] = true;
    }
    Ok(())
}

/// All permutations of `0..m` in lexicographic order.
pub fn permutations(m: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                rec(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::with_capacity(m), &mut vec![false; m], &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ortho_basis::BasisFamily;
    use proptest::prelude::*;

    fn sine(n: usize) -> BasisSpec {
        BasisSpec::new(BasisFamily::SineWiener, n)
    }

    fn wiener_closed(t: f64, s: f64) -> f64 {
        (t * s).signum() * t.abs().min(s.abs())
    }

    #[test]
    fn wiener_reconstruction_example() {
        let k = KernelSpec::wiener(400);
        let v = k.eval(&[0.5, -0.25], 400).unwrap();
        assert!((v + 0.25).abs() < 2e-3, "{v}");
    }

    #[test]
    fn wiener_reconstruction_within_tail_bound() {
        let k = KernelSpec::wiener(200);
        let bound = 2.0 * k.tail_mass(200).finite().unwrap();
        let mut rng = stream(11, 0, 0);
        for _ in 0..20 {
            let t = sample_marginal(crate::ortho_basis::MarginalLaw::UniformSymmetric, &mut rng);
            let s = sample_marginal(crate::ortho_basis::MarginalLaw::UniformSymmetric, &mut rng);
            let v = k.eval(&[t, s], 200).unwrap();
            assert!((v - wiener_closed(t, s)).abs() <= bound, "t={t} s={s}");
        }
    }

    #[test]
    fn single_term_kernel() {
        let b = sine(4);
        let k = KernelSpec::tensor(b, 2, [(vec![1, 1], 1.0)]).unwrap();
        let (t, s) = (0.3, -0.7);
        let want = b.eval(1, t).unwrap() * b.eval(1, s).unwrap();
        assert!((k.eval(&[t, s], 4).unwrap() - want).abs() < 1e-15);
    }

    #[test]
    fn diagonal_override_applies_only_on_diagonal() {
        let beta = 1.0;
        let k = KernelSpec::wiener(100).with_diagonal_override(1.0 + beta);
        assert_eq!(k.eval(&[0.3, 0.3], 100).unwrap(), 2.0);
        assert!((k.eval(&[0.3, 0.31], 100).unwrap() - 0.3).abs() < 1e-2);
    }

    #[test]
    fn construction_errors() {
        let b = sine(4);
        assert!(KernelSpec::tensor(b, 2, [(vec![0, 1], 1.0)]).is_err());
        assert!(KernelSpec::tensor(b, 2, [(vec![1], 1.0)]).is_err());
        assert!(KernelSpec::tensor(b, 2, [(vec![1, 5], 1.0)]).is_err());
        let k = KernelSpec::wiener(10);
        assert!(matches!(k.eval(&[0.1, 2.0], 10), Err(Error::OutsideSupport { .. })));
        assert!(k.eval(&[0.1, 0.2], 11).is_err());
        assert!(k.eval(&[0.1], 10).is_err());
    }

    #[test]
    fn symmetrize_examples() {
        let b = sine(3);
        let k = KernelSpec::tensor(b, 2, [(vec![1, 2], 1.0)]).unwrap();
        let s = k.symmetrize().unwrap();
        let want = KernelSpec::tensor(b, 2, [(vec![1, 2], 1.0), (vec![2, 1], 1.0)]).unwrap();
        assert_eq!(s, want);

        let k = KernelSpec::tensor(b, 3, [(vec![1, 2, 3], 1.0)]).unwrap();
        let s = k.symmetrize().unwrap();
        match s.coefficients() {
            Coefficients::Tensor(map) => {
                assert_eq!(map.len(), 6);
                assert!(map.values().all(|&v| v == 1.0));
            }
            _ => unreachable!(),
        }

        let sym = KernelSpec::tensor(b, 2, [(vec![1, 2], 0.5), (vec![2, 1], 0.5), (vec![3, 3], 2.0)]).unwrap();
        assert!(sym.is_symmetric());
        assert_eq!(sym.symmetrize().unwrap(), sym.scaled(2.0));
        assert!(!k.is_symmetric());

        let big = KernelSpec::tensor(sine(1), 7, [(vec![1; 7], 1.0)]).unwrap();
        assert!(matches!(big.symmetrize(), Err(Error::OrderTooLarge { .. })));
    }

    #[test]
    fn tail_mass_examples() {
        let k = KernelSpec::wiener(10);
        assert!((k.tail_mass(0).finite().unwrap() - 0.5).abs() < 1e-14);
        // partial sums plus tail agree
        let partial: f64 = (1..=50).map(|j| EigenSeries::new(EigenFormula::Wiener).lambda(j)).sum();
        assert!((partial + k.tail_mass(50).finite().unwrap() - 0.5).abs() < 1e-13);

        let t = KernelSpec::tensor(sine(5), 2, [(vec![1, 5], -2.0), (vec![2, 2], 1.0)]).unwrap();
        assert_eq!(t.tail_mass(5), TailMass::Finite(0.0));
        assert_eq!(t.tail_mass(4), TailMass::Finite(2.0));

        let h = KernelSpec::eigen(BasisSpec::new(BasisFamily::DiscreteSigned, 30), 2, EigenFormula::OneOverK).unwrap();
        assert_eq!(h.tail_mass(1000), TailMass::Infinite);
        assert!(!h.summable_abs());
    }

    #[test]
    fn defect_of_wiener_kernel_is_small() {
        let k = KernelSpec::wiener(50);
        let d = k.degeneracy_defect(1, 50, 500, 3).unwrap();
        assert!(d.value < 1e-3 + 3.0 * d.stderr, "{d:?}");
    }

    #[test]
    fn defect_of_contaminated_kernel_is_constant_squared() {
        let k = KernelSpec::wiener(20);
        let c = 0.3;
        let d = degeneracy_defect_of(k.basis(), 2, |p| Ok(k.eval(p, 20)? + c), 2, 50, 5).unwrap();
        assert!((d.value - c * c).abs() < 1e-8, "{d:?}");
    }

    #[test]
    fn defect_discrete_tensor_is_exactly_zero() {
        let b = BasisSpec::new(BasisFamily::DiscreteSigned, 6);
        let k = KernelSpec::tensor(b, 2, [(vec![1, 2], 0.7), (vec![3, 3], -1.0)]).unwrap();
        let d = k.degeneracy_defect(1, 6, 200, 9).unwrap();
        assert!(d.value < 1e-24, "{d:?}");
    }

    #[test]
    fn storage_order_does_not_matter() {
        let b = sine(6);
        let entries = vec![(vec![1, 2], 0.3), (vec![6, 1], -1.1), (vec![3, 3], 0.25), (vec![2, 5], 2.0)];
        let mut rev = entries.clone();
        rev.reverse();
        let a = KernelSpec::tensor(b, 2, entries).unwrap();
        let r = KernelSpec::tensor(b, 2, rev).unwrap();
        assert_eq!(a.eval(&[0.2, -0.9], 6).unwrap().to_bits(), r.eval(&[0.2, -0.9], 6).unwrap().to_bits());
    }

    #[test]
    fn permuted_arguments_swap_slots() {
        let b = sine(4);
        let k = KernelSpec::tensor(b, 3, [(vec![1, 2, 3], 1.0), (vec![4, 1, 1], -0.5)]).unwrap();
        let perm = [2, 0, 1];
        let g = k.permuted_arguments(&perm).unwrap();
        let t = [0.1, -0.4, 0.8];
        let tp: Vec<f64> = perm.iter().map(|&p| t[p]).collect();
        assert!((g.eval(&t, 4).unwrap() - k.eval(&tp, 4).unwrap()).abs() < 1e-14);
    }

    fn arb_tensor(order: usize) -> impl Strategy<Value = KernelSpec> {
        proptest::collection::vec((proptest::collection::vec(1usize..=4, order), -2.0f64..2.0), 1..6)
            .prop_map(move |entries| KernelSpec::tensor(sine(4), order, entries).unwrap())
    }

    proptest! {
        #[test]
        fn symmetrize_is_idempotent_up_to_factorial(k in (1usize..=4).prop_flat_map(arb_tensor)) {
            let s = k.symmetrize().unwrap();
            let fact: f64 = (1..=k.order()).product::<usize>() as f64;
            let twice = s.symmetrize().unwrap().scaled(1.0 / fact);
            if let (Coefficients::Tensor(a), Coefficients::Tensor(b)) = (twice.coefficients(), s.coefficients()) {
                prop_assert_eq!(a.len(), b.len());
                for (idx, v) in a {
                    prop_assert!((v - b[idx]).abs() <= 1e-12 * v.abs().max(1.0));
                }
            }
            prop_assert!(s.is_symmetric());
        }
    }
}
