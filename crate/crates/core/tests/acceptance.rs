//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

use std::f64::consts::PI;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use uvstat_core::expcli::check::{random_sparse_kernel, rel_diff};
use uvstat_core::expcli::{evaluate, find_scenario, ExperimentConfig, Report};
use uvstat_core::kernel::{EigenFormula, KernelSpec};
use uvstat_core::limit_law::{build_covariance, hermite, limit_u_from_tau, series_substitution_from_tau, CovarianceModel};
use uvstat_core::ortho_basis::{check_orthonormal, BasisFamily, BasisSpec, MarginalLaw};
use uvstat_core::process::{MomentMode, ProcessKind, ProcessSpec};
use uvstat_core::rng::{component, stream};
use uvstat_core::ustat_engine::{u_stat_factored, u_stat_naive, v_stat_factored, v_stat_naive};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn builtin(name: &str) -> ExperimentConfig {
    ExperimentConfig::parse(find_scenario(name).unwrap().config).unwrap()
}

fn value(report: &Report, name: &str) -> f64 {
    report.check(name).unwrap_or_else(|| panic!("missing check {name}")).value
}

fn within(elapsed: Duration, secs: u64) -> bool {
    elapsed <= Duration::from_secs(secs)
}

fn c1_orthonormality() -> Outcome {
    let t = Instant::now();
    let sine = check_orthonormal(&BasisSpec::new(BasisFamily::SineWiener, 20), 20, 1e-6).unwrap();
    let disc = check_orthonormal(&BasisSpec::new(BasisFamily::DiscreteSigned, 20), 20, 1e-9).unwrap();
    let el = t.elapsed();
    outcome(
        sine.max_deviation <= 1e-6 && disc.max_deviation <= 1e-9 && within(el, 5),
        format!(
            "sine dev {:.2e} (tol 1e-6), discrete dev {:.2e} (tol 1e-9), {el:.2?} (limit 5 s)",
            sine.max_deviation, disc.max_deviation
        ),
    )
}

fn c2_partition_oracle() -> Outcome {
    let t = Instant::now();
    let basis = BasisSpec::new(BasisFamily::SineWiener, 8);
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for seed in 0..50u64 {
        for order in 1..=3 {
            let kernel = random_sparse_kernel(basis, order, 6, 1000 + seed).unwrap();
            for n in 5..=40usize {
                let kind = if (seed as usize + n).is_multiple_of(2) { ProcessKind::Iid } else { ProcessKind::OneDependentShift };
                let path = ProcessSpec::new(kind, MarginalLaw::UniformSymmetric, seed).sample_path(n, order as u64);
                let u = rel_diff(u_stat_factored(&kernel, &path, 8).unwrap(), u_stat_naive(&kernel, &path, 8).unwrap());
                let v = rel_diff(v_stat_factored(&kernel, &path, 8).unwrap(), v_stat_naive(&kernel, &path, 8).unwrap());
                worst = worst.max(u).max(v);
                cases += 1;
            }
        }
    }
    let el = t.elapsed();
    outcome(
        worst <= 1e-10 && within(el, 60),
        format!("{cases} cases, max rel diff {worst:.2e} (tol 1e-10), {el:.2?} (limit 60 s)"),
    )
}

fn c3_reconstruction() -> Outcome {
    let n = 400;
    let kernel = KernelSpec::wiener(n);
    // tail summed directly to 10^6 plus the integral remainder beyond
    let lambda = |k: usize| 1.0 / (PI * (k as f64 - 0.5)).powi(2);
    let direct: f64 = (n + 1..=1_000_000).rev().map(lambda).sum();
    let bound = 2.0 * (direct + 1.0 / (PI * PI * 1_000_000.0));
    let mut rng = stream(33, 0, 0);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let (t, s): (f64, f64) = (rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0));
        let exact = (t * s).signum() * t.abs().min(s.abs());
        worst = worst.max((kernel.eval(&[t, s], n).unwrap() - exact).abs());
    }
    let big = 100_000;
    let partial: f64 = (1..=big).rev().map(lambda).sum();
    let total = partial + 1.0 / (PI * PI * big as f64);
    outcome(
        worst <= bound && (total - 0.5).abs() <= 1e-3,
        format!("100 pairs, max |err| {worst:.2e} <= 2·tail {bound:.2e}; Σλ ≈ {total:.9} (|Σλ − 1/2| tol 1e-3)"),
    )
}

fn c4_covariance() -> Outcome {
    let process = ProcessSpec::new(ProcessKind::OneDependentShift, MarginalLaw::UniformSymmetric, 20240605);
    let basis = BasisSpec::new(BasisFamily::SineWiener, 20);
    let analytic = build_covariance(&process, &basis, 20, 1, MomentMode::Analytic).unwrap();
    let exact = (1..=20).all(|k| (1..=20).all(|l| analytic.entry(k, l) == if k == l { 1.5 } else { 0.0 }));
    let dim = 5;
    let mc = build_covariance(&process, &basis, dim, 1, MomentMode::MonteCarlo { path_len: 100_000 }).unwrap();
    let mut worst_z: f64 = 0.0;
    for k in 1..=dim {
        for l in 1..=dim {
            let want = if k == l { 1.5 } else { 0.0 };
            worst_z = worst_z.max((mc.entry(k, l) - want).abs() / mc.stderr(k, l).unwrap());
        }
    }
    outcome(
        exact && worst_z <= 3.0,
        format!("analytic 20x20 == (3/2)I exactly: {exact}; MC path 1e5, {dim}x{dim}: max z {worst_z:.2} (limit 3)"),
    )
}

fn c5_iid_vstat() -> Outcome {
    let cfg = builtin("iid_vstat_wiener");
    assert_eq!(cfg.n_grid, vec![100, 400, 1600]);
    assert_eq!(cfg.replicates, 2000);
    let t = Instant::now();
    let report = evaluate(&cfg).unwrap();
    let el = t.elapsed();
    let ks: Vec<f64> = report.distances.iter().map(|d| d.ks).collect();
    let inversions = ks.windows(2).filter(|w| w[1] > w[0]).count();
    let last = *ks.last().unwrap();
    outcome(
        last <= 0.075 && inversions <= 1 && within(el, 600),
        format!(
            "KS at n=100,400,1600: {ks:.4?}; last <= 0.075; decreasing with {inversions} inversion(s), 1 allowed; {el:.1?} (limit 600 s)"
        ),
    )
}

fn c6_coincidence() -> Outcome {
    let cfg = builtin("prop2_refute_eagleson");
    assert_eq!((cfg.n_grid.as_slice(), cfg.replicates), (&[1600][..], 2000));
    assert_eq!(cfg.kernel.diagonal_beta, Some(1.0));
    let report = evaluate(&cfg).unwrap();
    let offset_law = value(&report, "ks_offset_law_n1600");
    let plugin_law = value(&report, "ks_plugin_law_n1600");
    outcome(
        offset_law <= 0.08 && plugin_law >= 0.25,
        format!(
            "seed {}: KS vs offset law {offset_law:.4} (<= 0.08), vs plug-in law {plugin_law:.4} (>= 0.25)",
            cfg.process.seed
        ),
    )
}

fn c7_divergence() -> Vec<(String, Outcome)> {
    let cfg = builtin("prop4_divergence");
    assert_eq!(cfg.n_grid, vec![500, 1000, 2000, 4000]);
    assert_eq!(cfg.replicates, 500);
    let report = evaluate(&cfg).unwrap();
    let medians: Vec<f64> = report.extra["medians"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["median_adjacent"].as_f64().unwrap())
        .collect();
    let increasing = medians.windows(2).all(|w| w[1] > w[0]);
    let ratio = medians[3] / medians[0];
    let ks = value(&report, "ks_remainder_n1000_vs_n4000");
    vec![
        ("7a adjacent-term median strictly increasing".into(), outcome(increasing, format!("medians {medians:.4?}"))),
        (
            "7b adjacent-term median at n=4000 > 3x n=500".into(),
            outcome(ratio > 3.0, format!("ratio {ratio:.4} (needs > 3)")),
        ),
        (
            "7c remainder law stable n=1000 vs n=4000".into(),
            outcome(ks <= 0.08, format!("seed {}: KS {ks:.4} (<= 0.08)", cfg.process.seed)),
        ),
    ]
}

/// Golub–Welsch nodes and weights for the standard Gaussian weight.
fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut jacobi = nalgebra::DMatrix::<f64>::zeros(n, n);
    for k in 1..n {
        let b = (k as f64).sqrt();
        jacobi[(k - 1, k)] = b;
        jacobi[(k, k - 1)] = b;
    }
    let eig = nalgebra::SymmetricEigen::new(jacobi);
    let weights = (0..n).map(|i| eig.eigenvectors[(0, i)].powi(2)).collect();
    (eig.eigenvalues.iter().copied().collect(), weights)
}

fn c8_hermite() -> Outcome {
    let closed: [fn(f64) -> f64; 3] = [
        |x| x * x - 1.0,
        |x| x * x * x - 3.0 * x,
        |x| x.powi(4) - 6.0 * x * x + 3.0,
    ];
    let mut exact = true;
    for x in (-40..=40).map(|i| i as f64 / 8.0) {
        for (d, f) in closed.iter().enumerate() {
            exact &= hermite(d + 2, x) == f(x);
        }
    }
    let draws = 100_000;
    let mut rng = stream(8, 0, component::HERMITE_CHECK);
    let z: Vec<f64> = (0..draws).map(|_| StandardNormal.sample(&mut rng)).collect();
    let (nodes, weights) = gauss_hermite(30);
    let mut worst_z: f64 = 0.0;
    for j in 0..=6 {
        for k in j..=6 {
            let mean = z.iter().map(|&x| hermite(j, x) * hermite(k, x)).sum::<f64>() / draws as f64;
            let want = if j == k { (1..=j).product::<usize>() as f64 } else { 0.0 };
            // exact standard error of the Monte Carlo mean, by quadrature
            let second: f64 =
                nodes.iter().zip(&weights).map(|(&x, w)| w * (hermite(j, x) * hermite(k, x)).powi(2)).sum();
            let se = ((second - want * want).max(0.0) / draws as f64).sqrt();
            let zscore = if se > 1e-12 {
                (mean - want).abs() / se
            } else if (mean - want).abs() <= 1e-12 {
                0.0
            } else {
                f64::INFINITY
            };
            worst_z = worst_z.max(zscore);
        }
    }
    outcome(
        exact && worst_z <= 3.0,
        format!("closed forms H2..H4 exact: {exact}; 1e5 draws, max |mean − δ j!| in exact stderr units {worst_z:.2} (limit 3)"),
    )
}

fn c9_identity() -> Outcome {
    let n = 40;
    let mut rng = stream(9, 0, 0);
    let lambdas: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0) / (1.0 + rng.random_range(0.0..5.0))).collect();
    let basis = BasisSpec::new(BasisFamily::SineWiener, n);
    let tensor =
        KernelSpec::tensor(basis, 2, lambdas.iter().enumerate().map(|(i, &l)| (vec![i + 1, i + 1], l))).unwrap();
    let eigen = KernelSpec::eigen(basis, 2, EigenFormula::Explicit(lambdas)).unwrap();
    let model = CovarianceModel::scaled_identity(n, 1.0).unwrap();
    let mut worst: f64 = 0.0;
    for r in 0..1000 {
        let tau = model.sample_tau(99, r);
        let a = limit_u_from_tau(&tensor, &tau, n).unwrap();
        let b = series_substitution_from_tau(&eigen, &tau, n).unwrap();
        worst = worst.max((a - b).abs());
    }
    outcome(worst <= 1e-12, format!("1000 replicates, max |Hermite form − χ² form| {worst:.2e} (tol 1e-12)"))
}

fn c10_determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("det.toml");
    let text = find_scenario("prop2_refute_eagleson")
        .unwrap()
        .config
        .replace("n_grid = [1600]", "n_grid = [200, 400]")
        .replace("replicates = 2000", "replicates = 300")
        .replace("truncation = 200", "truncation = 60");
    std::fs::write(&cfg_path, text).unwrap();
    let mut tables = Vec::new();
    for (run, workers) in [(0, 1), (1, 3), (2, 1)] {
        let out = dir.path().join(format!("run{run}"));
        let status = Command::new(env!("CARGO_BIN_EXE_uvstat"))
            .args(["run", "--config"])
            .arg(&cfg_path)
            .arg("--out")
            .arg(&out)
            .args(["--workers", &workers.to_string()])
            .output()
            .unwrap();
        if status.status.code() == Some(1) {
            return outcome(false, format!("run failed: {}", String::from_utf8_lossy(&status.stderr)));
        }
        tables.push(std::fs::read_to_string(out.join("samples.csv")).unwrap());
    }
    let parse = |s: &str| -> Vec<(String, f64)> {
        s.lines()
            .skip(2)
            .map(|l| {
                let (key, v) = l.rsplit_once(',').unwrap();
                (key.to_string(), v.parse().unwrap())
            })
            .collect()
    };
    let base = parse(&tables[0]);
    let mut worst: f64 = 0.0;
    let mut same_keys = true;
    for other in &tables[1..] {
        let o = parse(other);
        same_keys &= o.len() == base.len();
        for ((ka, a), (kb, b)) in base.iter().zip(&o) {
            same_keys &= ka == kb;
            worst = worst.max((a - b).abs());
        }
    }
    outcome(
        same_keys && worst <= 1e-12,
        format!("{} rows, workers 1/3/1, max elementwise diff {worst:.1e} (tol 1e-12)", base.len()),
    )
}

fn main() -> ExitCode {
    let mut results: Vec<(String, Outcome)> = vec![
        ("1 orthonormality".into(), c1_orthonormality()),
        ("2 partition-oracle equivalence".into(), c2_partition_oracle()),
        ("3 eigen-kernel reconstruction".into(), c3_reconstruction()),
        ("4 covariance constants".into(), c4_covariance()),
        ("5 iid V-statistic convergence".into(), c5_iid_vstat()),
        ("6 diagonal-modified kernel law".into(), c6_coincidence()),
    ];
    results.extend(c7_divergence());
    results.push(("8 Hermite suite".into(), c8_hermite()));
    results.push(("9 Hermite/χ² identity".into(), c9_identity()));
    results.push(("10 determinism across workers".into(), c10_determinism()));
    let mut failed = 0;
    for (name, o) in &results {
        println!("{} criterion {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.pass);
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
