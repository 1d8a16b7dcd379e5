//! Library results against brute-force formulas written out independently here.

use std::f64::consts::{PI, SQRT_2};

use proptest::prelude::*;
use uvstat_core::kernel::KernelSpec;
use uvstat_core::limit_law::{limit_u_from_tau, limit_v_from_tau, CovarianceModel};
use uvstat_core::ortho_basis::{BasisFamily, BasisSpec, MarginalLaw};
use uvstat_core::process::{ProcessKind, ProcessSpec};
use uvstat_core::ustat_engine::{u_stat_factored, v_stat_factored};

fn e(k: usize, t: f64) -> f64 {
    SQRT_2 * (PI * (k as f64 - 0.5) * t).sin()
}

fn brute(entries: &[((usize, usize), f64)], x: &[f64], distinct: bool) -> f64 {
    let n = x.len();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if distinct && i == j {
                continue;
            }
            s += entries.iter().map(|((a, b), c)| c * e(*a, x[i]) * e(*b, x[j])).sum::<f64>();
        }
    }
    s / n as f64
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn order_two_statistics_match_double_sums(
        entries in prop::collection::vec(((1usize..=5, 1usize..=5), -2.0f64..2.0), 1..6),
        n in 2usize..25,
        seed in 0u64..1000,
        dependent in any::<bool>(),
    ) {
        let kind = if dependent { ProcessKind::OneDependentShift } else { ProcessKind::Iid };
        let x = ProcessSpec::new(kind, MarginalLaw::UniformSymmetric, seed).sample_path(n, 0);
        let k = KernelSpec::tensor(
            BasisSpec::new(BasisFamily::SineWiener, 5),
            2,
            entries.iter().map(|((a, b), c)| (vec![*a, *b], *c)),
        ).unwrap();
        // merge duplicate indices the way the kernel stores them
        let merged: Vec<((usize, usize), f64)> = k.terms(5).into_iter().map(|(i, c)| ((i[0], i[1]), c)).collect();
        let u = brute(&merged, &x, true);
        let v = brute(&merged, &x, false);
        prop_assert!((u_stat_factored(&k, &x, 5).unwrap() - u).abs() <= 1e-10 * u.abs().max(1.0));
        prop_assert!((v_stat_factored(&k, &x, 5).unwrap() - v).abs() <= 1e-10 * v.abs().max(1.0));
    }

    #[test]
    fn wiener_limits_are_chi_square_forms(seed in 0u64..500, scale in 0.5f64..2.0) {
        let n = 60;
        let k = KernelSpec::wiener(n);
        let tau = CovarianceModel::scaled_identity(n, scale).unwrap().sample_tau(seed, 0);
        let lambda = |j: usize| 1.0 / (PI * (j as f64 - 0.5)).powi(2);
        let u: f64 = (1..=n).map(|j| lambda(j) * (tau[j - 1].powi(2) - 1.0)).sum();
        let v: f64 = (1..=n).map(|j| lambda(j) * tau[j - 1].powi(2)).sum();
        prop_assert!((limit_u_from_tau(&k, &tau, n).unwrap() - u).abs() < 1e-12);
        prop_assert!((limit_v_from_tau(&k, &tau, n).unwrap() - v).abs() < 1e-12);
    }
}

#[test]
fn wiener_tail_matches_direct_sum() {
    let k = KernelSpec::wiener(10);
    for n in [0usize, 1, 7, 50, 400] {
        let direct: f64 = (n + 1..=2_000_000).rev().map(|j| 1.0 / (PI * (j as f64 - 0.5)).powi(2)).sum::<f64>()
            + 1.0 / (PI * PI * 2_000_000.0);
        let tail = k.tail_mass(n).finite().unwrap();
        assert!((tail - direct).abs() < 1e-10, "n={n}: {tail} vs {direct}");
    }
}
