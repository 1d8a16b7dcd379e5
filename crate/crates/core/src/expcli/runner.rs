//! Scenario evaluation and artifact writing.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::json;

use crate::diagnostics::{convergence_table, ks_two_sample, wasserstein1};
use crate::error::{Error, Result};
use crate::expcli::config::{config_hash, ExperimentConfig, StatisticKind};
use crate::expcli::find_scenario;
use crate::expcli::svg::ecdf_svg;
use crate::kernel::KernelSpec;
use crate::limit_law::{
    build_covariance, coincidence_limit_sample, coincidence_offset, divergence_table, limit_u_sample,
    limit_v_sample, remainder_limit_sample, series_substitution_sample, CovarianceModel,
};
use crate::ortho_basis::{check_orthonormal, gram_matrix, BasisFamily, BasisSpec};
use crate::parallel::{map_replicates, with_workers};
use crate::process::{MomentMode, ProcessKind, ProcessSpec};
use crate::rng::derive_seed;
use crate::ustat_engine::{u0_stat_factored, u_stat_factored, v_stat_factored};

pub const SCHEMA_VERSION: u32 = 1;

/// Label under which limit-law draws derive their seed (grid sizes are ≥ 1).
const LIMIT_LABEL: u64 = 0;

/// Replicate-level values of one named quantity at one `n` (`n = 0` for limit draws).
#[derive(Debug, Clone, Serialize)]
pub struct Series {
    pub name: String,
    pub n: usize,
    pub values: Vec<f64>,
}

/// One named pass/fail decision.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub comparison: &'static str,
    pub threshold: f64,
    pub pass: bool,
}

impl Check {
    fn at_most(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self { name: name.into(), value, comparison: "<=", threshold, pass: value <= threshold }
    }

    fn at_least(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self { name: name.into(), value, comparison: ">=", threshold, pass: value >= threshold }
    }

    fn holds(name: impl Into<String>, ok: bool) -> Self {
        Self { name: name.into(), value: ok as u8 as f64, comparison: "==", threshold: 1.0, pass: ok }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DistanceRow {
    pub n: usize,
    #[serde(rename = "R")]
    pub replicates: usize,
    pub ks: f64,
    pub w1: f64,
    pub pass: bool,
    pub reference: String,
}

/// Everything a run produces, before it touches the file system.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub scenario: String,
    pub seed: u64,
    pub series: Vec<Series>,
    pub distances: Vec<DistanceRow>,
    pub checks: Vec<Check>,
    pub extra: serde_json::Value,
    /// Indices into `series` drawn in `ecdf.svg`.
    #[serde(skip)]
    pub plot: Vec<usize>,
}

impl Report {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn series(&self, name: &str, n: usize) -> Option<&Series> {
        self.series.iter().find(|s| s.name == name && s.n == n)
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub pass: bool,
    pub out_dir: PathBuf,
    pub config_sha256: String,
}

fn require<T>(v: Option<T>, key: &str) -> Result<T> {
    v.ok_or_else(|| Error::Config(format!("missing `{key}` for this scenario")))
}

fn statistic(kind: StatisticKind, kernel: &KernelSpec, path: &[f64], trunc: usize) -> Result<f64> {
    match kind {
        StatisticKind::U => u_stat_factored(kernel, path, trunc),
        StatisticKind::V => v_stat_factored(kernel, path, trunc),
        StatisticKind::U0 => u0_stat_factored(kernel, path, trunc, true),
    }
}

fn grid_process(process: &ProcessSpec, n: usize) -> ProcessSpec {
    process.with_seed(derive_seed(process.master_seed, n as u64))
}

fn stat_samples(cfg: &ExperimentConfig, kernel: &KernelSpec, n: usize) -> Result<Vec<f64>> {
    let p = grid_process(&cfg.process_spec(), n);
    let trunc = cfg.kernel.truncation();
    map_replicates(cfg.replicates, |r| statistic(cfg.statistic, kernel, &p.sample_path(n, r), trunc))
        .into_iter()
        .collect()
}

fn limit_samples<F>(cfg: &ExperimentConfig, draw: F) -> Result<Vec<f64>>
where
    F: Fn(u64, u64) -> Result<f64> + Sync + Send,
{
    let seed = derive_seed(cfg.process.seed, LIMIT_LABEL);
    map_replicates(cfg.replicates, |r| draw(seed, r)).into_iter().collect()
}

fn check_sampling(cfg: &ExperimentConfig) -> Result<()> {
    if cfg.n_grid.is_empty() {
        return Err(Error::Config("n_grid: at least one sample size is required".into()));
    }
    if cfg.replicates == 0 {
        return Err(Error::Config("replicates: must be positive".into()));
    }
    Ok(())
}

/// Evaluates the scenario named in `cfg.scenario`; pure apart from CPU time.
pub fn evaluate(cfg: &ExperimentConfig) -> Result<Report> {
    let scenario = find_scenario(&cfg.scenario)?;
    let mut report = Report {
        scenario: scenario.name.to_string(),
        seed: cfg.process.seed,
        series: Vec::new(),
        distances: Vec::new(),
        checks: Vec::new(),
        extra: json!({}),
        plot: Vec::new(),
    };
    match scenario.name {
        "iid_vstat_wiener" | "dep_ustat_theorem1" => convergence(cfg, &mut report)?,
        "prop2_refute_eagleson" => coincidence(cfg, &mut report)?,
        "prop4_divergence" => divergence(cfg, &mut report)?,
        "covariance_check" => covariance(cfg, &mut report)?,
        "ortho_check" => ortho(cfg, &mut report)?,
        other => return Err(Error::Unsupported(format!("scenario `{other}` has no evaluator"))),
    }
    Ok(report)
}

fn convergence(cfg: &ExperimentConfig, report: &mut Report) -> Result<()> {
    check_sampling(cfg)?;
    let kernel = cfg.kernel.build()?;
    let trunc = cfg.kernel.truncation();
    let model = build_covariance(&cfg.process_spec(), kernel.basis(), trunc, cfg.lag, MomentMode::Analytic)?;
    let limit = limit_samples(cfg, |seed, r| match cfg.statistic {
        StatisticKind::V => limit_v_sample(&kernel, &model, trunc, seed, r),
        StatisticKind::U | StatisticKind::U0 => limit_u_sample(&kernel, &model, trunc, seed, r),
    })?;
    let mut stats = Vec::new();
    for &n in &cfg.n_grid {
        stats.push((n, stat_samples(cfg, &kernel, n)?));
    }
    let table = convergence_table(&stats, &limit, cfg.process.seed)?;
    let ks_max = require(cfg.thresholds.ks_max, "thresholds.ks_max")?;
    for row in &table.rows {
        report.distances.push(DistanceRow {
            n: row.n,
            replicates: row.replicates,
            ks: row.ks,
            w1: row.w1,
            pass: row.ks <= ks_max,
            reference: "limit".into(),
        });
    }
    let last = table.rows.last().expect("nonempty grid");
    report.checks.push(Check::at_most(format!("ks_limit_n{}", last.n), last.ks, ks_max));
    if cfg.thresholds.require_trend.unwrap_or(false) {
        report.checks.push(Check::holds("ks_trend_decreasing", table.ks_trend_decreasing));
    }
    let stat_name = format!("{:?}_n", cfg.statistic);
    for (n, values) in stats {
        report.plot.push(report.series.len());
        report.series.push(Series { name: stat_name.clone(), n, values });
    }
    report.plot.push(report.series.len());
    report.series.push(Series { name: "limit".into(), n: 0, values: limit });
    report.extra = json!({
        "ks_inversions": table.ks_inversions,
        "covariance_diagonal": model.entry(1, 1),
        "truncation": trunc,
    });
    Ok(())
}

fn coincidence(cfg: &ExperimentConfig, report: &mut Report) -> Result<()> {
    check_sampling(cfg)?;
    let kernel = cfg.kernel.build()?;
    let trunc = cfg.kernel.truncation();
    let model = build_covariance(&cfg.process_spec(), kernel.basis(), trunc, cfg.lag, MomentMode::Analytic)?;
    let corrected = limit_samples(cfg, |s, r| coincidence_limit_sample(&kernel, &model, trunc, s, r))?;
    let plugin = limit_samples(cfg, |s, r| series_substitution_sample(&kernel, &model, trunc, s, r))?;
    let ks_max = require(cfg.thresholds.ks_max, "thresholds.ks_max")?;
    let ks_min = require(cfg.thresholds.ks_min, "thresholds.ks_min")?;
    let mut last = (0.0, 0.0);
    for &n in &cfg.n_grid {
        let stats = stat_samples(cfg, &kernel, n)?;
        let (kc, kp) = (ks_two_sample(&stats, &corrected)?, ks_two_sample(&stats, &plugin)?);
        let seed = cfg.process.seed;
        report.distances.push(DistanceRow {
            n,
            replicates: stats.len(),
            ks: kc,
            w1: wasserstein1(&stats, &corrected, seed)?,
            pass: kc <= ks_max,
            reference: "offset_law".into(),
        });
        report.distances.push(DistanceRow {
            n,
            replicates: stats.len(),
            ks: kp,
            w1: wasserstein1(&stats, &plugin, seed)?,
            pass: kp >= ks_min,
            reference: "plugin_law".into(),
        });
        last = (kc, kp);
        report.plot.push(report.series.len());
        report.series.push(Series { name: "U_n".into(), n, values: stats });
    }
    let n = *cfg.n_grid.last().expect("nonempty grid");
    report.checks.push(Check::at_most(format!("ks_offset_law_n{n}"), last.0, ks_max));
    report.checks.push(Check::at_least(format!("ks_plugin_law_n{n}"), last.1, ks_min));
    report.plot.push(report.series.len());
    report.series.push(Series { name: "offset_law".into(), n: 0, values: corrected });
    report.plot.push(report.series.len());
    report.series.push(Series { name: "plugin_law".into(), n: 0, values: plugin });
    report.extra = json!({
        "offset": coincidence_offset(&kernel, trunc)?,
        "diagonal_value": kernel.diagonal_override(),
        "truncation": trunc,
    });
    Ok(())
}

fn divergence(cfg: &ExperimentConfig, report: &mut Report) -> Result<()> {
    check_sampling(cfg)?;
    let kernel = cfg.kernel.build()?;
    let trunc = cfg.kernel.truncation();
    let table = divergence_table(&cfg.n_grid, &kernel, &cfg.process_spec(), cfg.replicates, trunc)?;
    let t = &cfg.thresholds;
    let ks_max = require(t.ks_max, "thresholds.ks_max")?;
    let growth_min = require(t.growth_ratio_min, "thresholds.growth_ratio_min")?;
    let from_n = t.stability_from_n.unwrap_or(cfg.n_grid[0]);
    let from = cfg
        .n_grid
        .iter()
        .position(|&n| n == from_n)
        .ok_or_else(|| Error::Config(format!("thresholds.stability_from_n: {from_n} is not in n_grid")))?;
    let last = cfg.n_grid.len() - 1;
    let last_n = cfg.n_grid[last];
    let reference = &table.remainder_samples[last];
    for (i, &n) in cfg.n_grid.iter().enumerate() {
        let s = &table.remainder_samples[i];
        let ks = ks_two_sample(s, reference)?;
        report.distances.push(DistanceRow {
            n,
            replicates: s.len(),
            ks,
            w1: wasserstein1(s, reference, cfg.process.seed)?,
            pass: ks <= ks_max,
            reference: format!("remainder_n{last_n}"),
        });
    }
    report.checks.push(Check::holds("adjacent_median_strictly_increasing", table.adjacent_strictly_increasing()));
    report.checks.push(Check::at_least(
        format!("adjacent_median_ratio_n{last_n}_over_n{}", cfg.n_grid[0]),
        table.adjacent_growth_ratio(),
        growth_min,
    ));
    let ks_stable = ks_two_sample(&table.remainder_samples[from], reference)?;
    report.checks.push(Check::at_most(format!("ks_remainder_n{from_n}_vs_n{last_n}"), ks_stable, ks_max));

    let model = CovarianceModel::scaled_identity(trunc, 1.5)?;
    let model = match cfg.process.kind {
        ProcessKind::OneDependentShift => model,
        ProcessKind::Iid => CovarianceModel::scaled_identity(trunc, 1.0)?,
    };
    let limit = limit_samples(cfg, |s, r| remainder_limit_sample(&kernel, &model, trunc, s, r))?;
    report.extra = json!({
        "medians": table.rows,
        "ks_remainder_vs_limit_last_n": ks_two_sample(reference, &limit)?,
        "truncation": trunc,
    });
    for (i, &n) in cfg.n_grid.iter().enumerate() {
        report.series.push(Series { name: "adjacent".into(), n, values: table.adjacent_samples[i].clone() });
    }
    for (i, &n) in cfg.n_grid.iter().enumerate() {
        report.plot.push(report.series.len());
        report.series.push(Series { name: "remainder".into(), n, values: table.remainder_samples[i].clone() });
    }
    report.plot.push(report.series.len());
    report.series.push(Series { name: "remainder_limit".into(), n: 0, values: limit });
    Ok(())
}

fn expected_covariance(kind: ProcessKind, k: usize, l: usize, lag: usize) -> f64 {
    match (kind, k == l) {
        (_, false) => 0.0,
        (ProcessKind::Iid, true) => 1.0,
        (ProcessKind::OneDependentShift, true) if lag == 0 => 1.0,
        (ProcessKind::OneDependentShift, true) => 1.5,
    }
}

fn covariance(cfg: &ExperimentConfig, report: &mut Report) -> Result<()> {
    let process = cfg.process_spec();
    let basis = BasisSpec::new(cfg.kernel.basis, cfg.kernel.truncation());
    let dim = basis.max_index;
    let path_len = require(cfg.mc_path_len, "mc_path_len")?;
    let z_max = require(cfg.thresholds.z_max, "thresholds.z_max")?;
    let analytic = build_covariance(&process, &basis, dim, cfg.lag, MomentMode::Analytic)?;
    let mc = build_covariance(&process, &basis, dim, cfg.lag, MomentMode::MonteCarlo { path_len })?;
    let (mut worst_exact, mut worst_z): (f64, f64) = (0.0, 0.0);
    let mut rows_a = Vec::new();
    let mut rows_m = Vec::new();
    for k in 1..=dim {
        for l in 1..=dim {
            let want = expected_covariance(process.kind, k, l, cfg.lag);
            worst_exact = worst_exact.max((analytic.entry(k, l) - want).abs());
            let se = mc.stderr(k, l).unwrap_or(f64::NAN);
            worst_z = worst_z.max((mc.entry(k, l) - analytic.entry(k, l)).abs() / se);
            rows_a.push(analytic.entry(k, l));
            rows_m.push(mc.entry(k, l));
        }
    }
    report.checks.push(Check::at_most("analytic_max_abs_deviation", worst_exact, 0.0));
    report.checks.push(Check::at_most("mc_max_stderr_z", worst_z, z_max));
    report.series.push(Series { name: "covariance_analytic".into(), n: dim, values: rows_a });
    report.series.push(Series { name: "covariance_mc".into(), n: dim, values: rows_m });
    report.extra = json!({
        "dim": dim,
        "path_len": path_len,
        "analytic_csv": analytic.to_csv(),
        "mc_csv": mc.to_csv(),
        "mc_psd_repaired": mc.psd_repaired(),
    });
    Ok(())
}

fn ortho(cfg: &ExperimentConfig, report: &mut Report) -> Result<()> {
    let upto = cfg.kernel.truncation();
    let tols = [
        (BasisFamily::SineWiener, require(cfg.thresholds.gram_tol, "thresholds.gram_tol")?),
        (BasisFamily::DiscreteSigned, require(cfg.thresholds.gram_tol_discrete, "thresholds.gram_tol_discrete")?),
    ];
    let mut extra = serde_json::Map::new();
    for (family, tol) in tols {
        let spec = BasisSpec::new(family, upto);
        let rep = check_orthonormal(&spec, upto, tol)?;
        report.checks.push(Check::at_most(format!("gram_{}_max_deviation", family.name()), rep.max_deviation, tol));
        let g = gram_matrix(&spec, upto)?;
        report.series.push(Series {
            name: format!("gram_{}", family.name()),
            n: upto,
            values: g.into_iter().flatten().collect(),
        });
        extra.insert(family.name().to_string(), json!(rep));
    }
    report.extra = serde_json::Value::Object(extra);
    Ok(())
}

fn summary_json(cfg: &ExperimentConfig, report: &Report, hash: &str) -> Result<String> {
    let v = json!({
        "schema_version": SCHEMA_VERSION,
        "config_sha256": hash,
        "scenario": report.scenario,
        "seed": report.seed,
        "statistic": cfg.statistic,
        "n_grid": cfg.n_grid,
        "replicates": cfg.replicates,
        "pass": report.pass(),
        "checks": report.checks,
        "distances": report.distances,
        "extra": report.extra,
    });
    serde_json::to_string_pretty(&v).map(|s| s + "\n").map_err(|e| Error::Unsupported(e.to_string()))
}

/// Writes `samples.csv`, `distances.csv`, `summary.json` and `ecdf.svg`.
pub fn write_artifacts(cfg: &ExperimentConfig, report: &Report, hash: &str, out_dir: &Path) -> Result<()> {
    fs::create_dir_all(out_dir)?;
    let mut samples = format!("# config_sha256={hash}\nseries,n,replicate,value\n");
    for s in &report.series {
        for (r, v) in s.values.iter().enumerate() {
            let _ = writeln!(samples, "{},{},{r},{v:e}", s.name, s.n);
        }
    }
    fs::write(out_dir.join("samples.csv"), samples)?;

    let mut distances = format!("# config_sha256={hash}\nn,R,ks,w1,pass,reference\n");
    for d in &report.distances {
        let _ = writeln!(distances, "{},{},{:e},{:e},{},{}", d.n, d.replicates, d.ks, d.w1, d.pass, d.reference);
    }
    fs::write(out_dir.join("distances.csv"), distances)?;
    fs::write(out_dir.join("summary.json"), summary_json(cfg, report, hash)?)?;

    let curves: Vec<(String, Vec<f64>)> = report
        .plot
        .iter()
        .map(|&i| {
            let s = &report.series[i];
            let label = if s.n == 0 { s.name.clone() } else { format!("{} (n={})", s.name, s.n) };
            (label, s.values.clone())
        })
        .collect();
    fs::write(out_dir.join("ecdf.svg"), ecdf_svg(&report.scenario, &curves, hash))?;
    Ok(())
}

/// Parses, evaluates on `workers` threads and writes artifacts. The hash
/// covers the config bytes plus any seed override.
pub fn run(
    config_bytes: &str,
    scenario_override: Option<&str>,
    seed_override: Option<u64>,
    out_override: Option<&Path>,
    workers: Option<usize>,
) -> Result<RunOutcome> {
    let mut cfg = ExperimentConfig::parse(config_bytes)?;
    let mut hashed = config_bytes.to_string();
    if let Some(name) = scenario_override {
        find_scenario(name)?;
        cfg.scenario = name.to_string();
        hashed.push_str(&format!("\n# scenario override: {name}\n"));
    }
    if let Some(seed) = seed_override {
        cfg.process.seed = seed;
        hashed.push_str(&format!("\n# seed override: {seed}\n"));
    }
    let hash = config_hash(hashed.as_bytes());
    let out_dir = out_override
        .map(Path::to_path_buf)
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out").join(&cfg.scenario));
    let report = with_workers(workers, || evaluate(&cfg))?;
    write_artifacts(&cfg, &report, &hash, &out_dir)?;
    Ok(RunOutcome { pass: report.pass(), out_dir, config_sha256: hash })
}
