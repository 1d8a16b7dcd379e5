//! Quick self-checks behind `uvstat check`.

use rand::Rng;

use crate::error::Result;
use crate::expcli::runner::Check;
use crate::kernel::KernelSpec;
use crate::limit_law::build_covariance;
use crate::ortho_basis::{check_orthonormal, BasisFamily, BasisSpec, MarginalLaw};
use crate::process::{MomentMode, ProcessKind, ProcessSpec};
use crate::rng::stream;
use crate::ustat_engine::{u_stat_factored, u_stat_naive, v_stat_factored, v_stat_naive};

/// A tensor kernel with `terms` random coefficients in `[-1, 1]` on indices `≤ max_index`.
pub fn random_sparse_kernel(basis: BasisSpec, order: usize, terms: usize, seed: u64) -> Result<KernelSpec> {
    let mut rng = stream(seed, 0, 0);
    let entries: Vec<(Vec<usize>, f64)> = (0..terms)
        .map(|_| {
            let idx = (0..order).map(|_| rng.random_range(1..=basis.max_index)).collect();
            (idx, rng.random_range(-1.0..=1.0))
        })
        .collect();
    KernelSpec::tensor(basis, order, entries)
}

/// `|a − b| / max(1, |b|)`.
pub fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

pub fn ortho_suite() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for (family, tol) in [(BasisFamily::SineWiener, 1e-6), (BasisFamily::DiscreteSigned, 1e-9)] {
        let rep = check_orthonormal(&BasisSpec::new(family, 20), 20, tol)?;
        out.push(check(format!("ortho_{}", family.name()), rep.max_deviation, tol));
    }
    Ok(out)
}

pub fn covariance_suite() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for (family, law) in [
        (BasisFamily::SineWiener, MarginalLaw::UniformSymmetric),
        (BasisFamily::DiscreteSigned, MarginalLaw::SignedGeometric),
    ] {
        let basis = BasisSpec::new(family, 20);
        for (kind, diag) in [(ProcessKind::Iid, 1.0), (ProcessKind::OneDependentShift, 1.5)] {
            let m = build_covariance(&ProcessSpec::new(kind, law, 1), &basis, 20, 1, MomentMode::Analytic)?;
            let mut worst: f64 = 0.0;
            for k in 1..=20 {
                for l in 1..=20 {
                    let want = if k == l { diag } else { 0.0 };
                    worst = worst.max((m.entry(k, l) - want).abs());
                }
            }
            out.push(check(format!("covariance_{}_{:?}", family.name(), kind), worst, 0.0));
        }
    }
    Ok(out)
}

pub fn partition_suite() -> Result<Vec<Check>> {
    let mut worst: f64 = 0.0;
    for order in 1..=3 {
        for seed in 0..5u64 {
            let kernel = random_sparse_kernel(BasisSpec::new(BasisFamily::SineWiener, 6), order, 5, seed)?;
            let p = ProcessSpec::new(ProcessKind::OneDependentShift, MarginalLaw::UniformSymmetric, seed);
            for n in [5, 9, 14] {
                let path = p.sample_path(n, order as u64);
                worst = worst.max(rel_diff(u_stat_factored(&kernel, &path, 6)?, u_stat_naive(&kernel, &path, 6)?));
                worst = worst.max(rel_diff(v_stat_factored(&kernel, &path, 6)?, v_stat_naive(&kernel, &path, 6)?));
            }
        }
    }
    Ok(vec![check("partition_oracle_max_rel_diff", worst, 1e-10)])
}

fn check(name: impl Into<String>, value: f64, threshold: f64) -> Check {
    Check { name: name.into(), value, comparison: "<=", threshold, pass: value <= threshold }
}

/// All suites, in a fixed order.
pub fn run_all() -> Result<Vec<Check>> {
    let mut out = ortho_suite()?;
    out.extend(covariance_suite()?);
    out.extend(partition_suite()?);
    Ok(out)
}
