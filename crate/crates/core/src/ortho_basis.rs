//! Closed-form orthonormal bases `{e_k}` with `e_0 ≡ 1` over the two shipped
//! marginal laws, plus a numerical orthonormality check.
//!
//! New families plug in by adding a [`BasisFamily`] variant with its
//! [`MarginalLaw`], a closed-form `eval`, and a Gram integration rule.

use std::f64::consts::{PI, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{integrate, pairwise_sum};

/// Requested absolute error for continuous Gram entries.
pub const QUADRATURE_TOL: f64 = 1e-10;
/// Discrete sums stop once the residual probability mass drops below this.
pub const DISCRETE_TAIL_MASS: f64 = 1e-12;

pub const DEFAULT_SINE_TRUNCATION: usize = 200;
pub const DEFAULT_DISCRETE_TRUNCATION: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MarginalLaw {
    /// Density 1/2 on `[-1, 1]`.
    UniformSymmetric,
    /// Mass `2^{-|k|-1}` on each nonzero integer `k`.
    SignedGeometric,
}

impl MarginalLaw {
    pub fn name(self) -> &'static str {
        match self {
            MarginalLaw::UniformSymmetric => "uniform_symmetric",
            MarginalLaw::SignedGeometric => "signed_geometric",
        }
    }

    pub fn is_discrete(self) -> bool {
        matches!(self, MarginalLaw::SignedGeometric)
    }

    pub fn contains(self, t: f64) -> bool {
        match self {
            MarginalLaw::UniformSymmetric => (-1.0..=1.0).contains(&t),
            MarginalLaw::SignedGeometric => t != 0.0 && t.fract() == 0.0 && t.is_finite(),
        }
    }

    pub fn check(self, t: f64) -> Result<()> {
        if self.contains(t) {
            Ok(())
        } else {
            Err(Error::OutsideSupport { point: t, law: self.name() })
        }
    }

    /// Right-continuous distribution function.
    pub fn cdf(self, x: f64) -> f64 {
        match self {
            MarginalLaw::UniformSymmetric => ((x + 1.0) / 2.0).clamp(0.0, 1.0),
            MarginalLaw::SignedGeometric => {
                let k = x.floor();
                if k <= -1.0 {
                    // P(Y <= -j) = P(|Y| >= j)/2 = 2^{-j}
                    0.5f64.powf(-k)
                } else if k < 1.0 {
                    0.5
                } else {
                    1.0 - 0.5f64.powf(k + 1.0)
                }
            }
        }
    }

    /// Mass of the atom at `t` (zero for continuous laws).
    pub fn mass(self, t: f64) -> f64 {
        match self {
            MarginalLaw::UniformSymmetric => 0.0,
            MarginalLaw::SignedGeometric if self.contains(t) => 0.5f64.powf(t.abs() + 1.0),
            MarginalLaw::SignedGeometric => 0.0,
        }
    }

    /// Largest `|k|` needed for the residual mass `2^{-K}` to fall below
    /// [`DISCRETE_TAIL_MASS`].
    pub fn discrete_cutoff() -> usize {
        (1.0 / DISCRETE_TAIL_MASS).log2().ceil() as usize
    }

    /// Expectation of `g(Y)` under the law: adaptive quadrature for the
    /// uniform law, weighted summation over `|k| <= max(cutoff, min_support)`
    /// for the signed-geometric law.
    pub fn expect<G: Fn(f64) -> f64>(self, g: G, min_support: usize) -> Result<f64> {
        match self {
            MarginalLaw::UniformSymmetric => {
                Ok(integrate(|t| 0.5 * g(t), -1.0, 1.0, QUADRATURE_TOL)?.value)
            }
            MarginalLaw::SignedGeometric => {
                let top = Self::discrete_cutoff().max(min_support);
                let terms: Vec<f64> = (1..=top)
                    .flat_map(|k| {
                        let p = 0.5f64.powi(k as i32 + 1);
                        let t = k as f64;
                        [p * g(t), p * g(-t)]
                    })
                    .collect();
                Ok(pairwise_sum(&terms))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasisFamily {
    /// `e_k(t) = √2 sin(π(k − 1/2)t)` on `[-1, 1]`, the eigenfunctions of
    /// `sign(ts)·min(|t|,|s|)`.
    SineWiener,
    /// `e_k(±k) = ±2^{k/2}`, zero elsewhere, over the signed-geometric law.
    DiscreteSigned,
}

impl BasisFamily {
    pub fn marginal(self) -> MarginalLaw {
        match self {
            BasisFamily::SineWiener => MarginalLaw::UniformSymmetric,
            BasisFamily::DiscreteSigned => MarginalLaw::SignedGeometric,
        }
    }

    pub fn default_truncation(self) -> usize {
        match self {
            BasisFamily::SineWiener => DEFAULT_SINE_TRUNCATION,
            BasisFamily::DiscreteSigned => DEFAULT_DISCRETE_TRUNCATION,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            BasisFamily::SineWiener => "sine_wiener",
            BasisFamily::DiscreteSigned => "discrete_signed",
        }
    }
}

/// An orthonormal family truncated at `max_index`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BasisSpec {
    pub family: BasisFamily,
    pub max_index: usize,
}

impl BasisSpec {
    pub fn new(family: BasisFamily, max_index: usize) -> Self {
        Self { family, max_index }
    }

    pub fn with_default_truncation(family: BasisFamily) -> Self {
        Self::new(family, family.default_truncation())
    }

    pub fn marginal(&self) -> MarginalLaw {
        self.family.marginal()
    }

    /// Evaluates `e_k(t)`.
    pub fn eval(&self, k: usize, t: f64) -> Result<f64> {
        if k > self.max_index {
            return Err(Error::IndexOutOfRange { index: k, max_index: self.max_index });
        }
        self.marginal().check(t)?;
        Ok(eval_unchecked(self.family, k, t))
    }

    /// Writes `e_1(t), …, e_N(t)` into `out[0..N]`.
    ///
    /// For the sine family the values come from a rotation recurrence that is
    /// re-anchored every 32 steps, so the drift stays at a few ulps.
    pub fn eval_all_into(&self, t: f64, out: &mut [f64]) {
        let n = out.len().min(self.max_index);
        match self.family {
            BasisFamily::SineWiener => {
                let theta = PI * t;
                let (step_s, step_c) = theta.sin_cos();
                let mut k = 1usize;
                while k <= n {
                    let phase = (k as f64 - 0.5) * theta;
                    let (mut s, mut c) = phase.sin_cos();
                    let stop = (k + 32).min(n + 1);
                    while k < stop {
                        out[k - 1] = SQRT_2 * s;
                        let s_next = s * step_c + c * step_s;
                        c = c * step_c - s * step_s;
                        s = s_next;
                        k += 1;
                    }
                }
            }
            BasisFamily::DiscreteSigned => {
                out[..n].iter_mut().for_each(|v| *v = 0.0);
                let a = t.abs();
                if a >= 1.0 && a <= n as f64 {
                    let k = a as usize;
                    out[k - 1] = eval_unchecked(self.family, k, t);
                }
            }
        }
    }
}

fn eval_unchecked(family: BasisFamily, k: usize, t: f64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    match family {
        BasisFamily::SineWiener => SQRT_2 * (PI * (k as f64 - 0.5) * t).sin(),
        BasisFamily::DiscreteSigned => {
            if t.abs() == k as f64 {
                t.signum() * 2f64.powf(k as f64 / 2.0)
            } else {
                0.0
            }
        }
    }
}

/// Gram matrix `G[j][k] = E e_j(Y) e_k(Y)` for `j, k <= upto`.
pub fn gram_matrix(spec: &BasisSpec, upto: usize) -> Result<Vec<Vec<f64>>> {
    if upto > spec.max_index {
        return Err(Error::IndexOutOfRange { index: upto, max_index: spec.max_index });
    }
    let marginal = spec.marginal();
    let family = spec.family;
    let mut g = vec![vec![0.0; upto + 1]; upto + 1];
    for (j, k) in (0..=upto).flat_map(|j| (j..=upto).map(move |k| (j, k))) {
        let v = marginal.expect(|t| eval_unchecked(family, j, t) * eval_unchecked(family, k, t), upto)?;
        g[j][k] = v;
        g[k][j] = v;
    }
    Ok(g)
}

#[derive(Debug, Clone, Serialize)]
pub struct OrthoReport {
    pub family: BasisFamily,
    pub upto: usize,
    pub tol: f64,
    pub max_deviation: f64,
    pub pass: bool,
}

/// Checks `max |G − I| < tol` entrywise.
pub fn check_orthonormal(spec: &BasisSpec, upto: usize, tol: f64) -> Result<OrthoReport> {
    let g = gram_matrix(spec, upto)?;
    let max_deviation = g
        .iter()
        .enumerate()
        .flat_map(|(j, row)| row.iter().enumerate().map(move |(k, v)| (v - if j == k { 1.0 } else { 0.0 }).abs()))
        .fold(0.0, f64::max);
    Ok(OrthoReport { family: spec.family, upto, tol, max_deviation, pass: max_deviation < tol })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sine(n: usize) -> BasisSpec {
        BasisSpec::new(BasisFamily::SineWiener, n)
    }

    fn discrete(n: usize) -> BasisSpec {
        BasisSpec::new(BasisFamily::DiscreteSigned, n)
    }

    #[test]
    fn eval_examples() {
        assert!((sine(5).eval(1, 0.5).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(sine(5).eval(0, 0.77).unwrap(), 1.0);
        assert_eq!(discrete(5).eval(0, -4.0).unwrap(), 1.0);
        assert!((discrete(5).eval(3, -3.0).unwrap() + 2.0f64.powf(1.5)).abs() < 1e-15);
        assert_eq!(discrete(5).eval(3, 2.0).unwrap(), 0.0);
    }

    #[test]
    fn eval_errors() {
        assert!(matches!(sine(5).eval(6, 0.0), Err(Error::IndexOutOfRange { .. })));
        assert!(matches!(sine(5).eval(1, 1.5), Err(Error::OutsideSupport { .. })));
        assert!(matches!(discrete(5).eval(1, 0.0), Err(Error::OutsideSupport { .. })));
        assert!(matches!(discrete(5).eval(1, 1.5), Err(Error::OutsideSupport { .. })));
    }

    #[test]
    fn eval_all_matches_pointwise() {
        let spec = sine(400);
        let mut out = vec![0.0; 400];
        for &t in &[-1.0, -0.731, -0.0001, 0.0, 0.25, 0.999] {
            spec.eval_all_into(t, &mut out);
            for k in 1..=400 {
                let direct = spec.eval(k, t).unwrap();
                assert!((out[k - 1] - direct).abs() < 1e-12, "k={k} t={t} diff={}", out[k - 1] - direct);
            }
        }
        let spec = discrete(10);
        let mut out = vec![0.0; 10];
        spec.eval_all_into(-7.0, &mut out);
        for k in 1..=10 {
            assert_eq!(out[k - 1], spec.eval(k, -7.0).unwrap());
        }
        // beyond truncation every truncated basis function vanishes
        spec.eval_all_into(12.0, &mut out);
        assert!(out.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn sine_is_odd() {
        let spec = sine(50);
        for k in 1..=50 {
            for &t in &[0.1, 0.42, 0.9] {
                assert_eq!(spec.eval(k, -t).unwrap(), -spec.eval(k, t).unwrap());
            }
        }
    }

    #[test]
    fn gram_examples() {
        let g = gram_matrix(&sine(5), 5).unwrap();
        for (j, row) in g.iter().enumerate() {
            for (k, v) in row.iter().enumerate() {
                let want = if j == k { 1.0 } else { 0.0 };
                assert!((v - want).abs() < 1e-8, "G[{j}][{k}] = {v}");
            }
        }
        assert!(gram_matrix(&sine(1), 1).unwrap()[0][1].abs() < 1e-15);
        let g = gram_matrix(&discrete(5), 5).unwrap();
        for (j, row) in g.iter().enumerate() {
            for (k, v) in row.iter().enumerate() {
                let want = if j == k { 1.0 } else { 0.0 };
                assert!((v - want).abs() < 1e-10);
            }
        }
        assert!(gram_matrix(&sine(3), 4).is_err());
    }

    #[test]
    fn orthonormality_reports() {
        assert!(check_orthonormal(&sine(10), 10, 1e-6).unwrap().pass);
        assert!(check_orthonormal(&discrete(10), 10, 1e-9).unwrap().pass);
        assert!(!check_orthonormal(&sine(10), 10, 0.0).unwrap().pass);
    }

    #[test]
    fn discrete_gram_beyond_tail_cutoff() {
        // indices above the mass cutoff are still integrated exactly
        let g = gram_matrix(&discrete(45), 45).unwrap();
        assert!((g[45][45] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn marginal_cdf_and_mass() {
        let law = MarginalLaw::SignedGeometric;
        assert_eq!(law.cdf(-2.0), 0.25);
        assert_eq!(law.cdf(-1.0), 0.5);
        assert_eq!(law.cdf(-0.5), 0.5);
        assert_eq!(law.cdf(1.0), 0.75);
        assert_eq!(law.cdf(2.0), 0.875);
        assert_eq!(law.mass(-3.0), 1.0 / 16.0);
        let total = law.expect(|_| 1.0, 0).unwrap();
        assert!((total - 1.0).abs() < 1e-12);
        assert_eq!(MarginalLaw::UniformSymmetric.cdf(0.0), 0.5);
    }
}
