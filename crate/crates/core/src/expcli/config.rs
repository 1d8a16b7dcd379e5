//! Strict TOML experiment configs.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::kernel::{EigenFormula, KernelSpec};
use crate::ortho_basis::{BasisFamily, BasisSpec, MarginalLaw};
use crate::process::{ProcessKind, ProcessSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StatisticKind {
    U,
    U0,
    V,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: String,
    #[serde(default = "default_statistic")]
    pub statistic: StatisticKind,
    #[serde(default)]
    pub n_grid: Vec<usize>,
    #[serde(default)]
    pub replicates: usize,
    /// Number of cross-lag moments summed into the limit covariance.
    #[serde(default = "default_lag")]
    pub lag: usize,
    /// Path length for Monte Carlo covariance estimates.
    #[serde(default)]
    pub mc_path_len: Option<usize>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    pub process: ProcessBlock,
    pub kernel: KernelBlock,
    #[serde(default)]
    pub thresholds: Thresholds,
}

fn default_statistic() -> StatisticKind {
    StatisticKind::U
}

fn default_lag() -> usize {
    1
}

fn default_order() -> usize {
    2
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProcessBlock {
    pub kind: ProcessKind,
    pub marginal: MarginalLaw,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EigenChoice {
    Named(String),
    List(Vec<f64>),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TensorTerm {
    pub index: Vec<usize>,
    pub value: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelBlock {
    pub basis: BasisFamily,
    #[serde(default = "default_order")]
    pub order: usize,
    #[serde(default)]
    pub eigenvalues: Option<EigenChoice>,
    #[serde(default)]
    pub terms: Vec<TensorTerm>,
    /// Sets `f(t, …, t) ≡ 1 + β` on the full diagonal.
    #[serde(default)]
    pub diagonal_beta: Option<f64>,
    #[serde(default)]
    pub truncation: Option<usize>,
}

/// Pass/fail thresholds; which ones apply depends on the scenario.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Thresholds {
    /// Upper bound on a KS distance that should be small.
    pub ks_max: Option<f64>,
    /// Lower bound on a KS distance that should be large.
    pub ks_min: Option<f64>,
    /// Require KS to decrease along the grid (one inversion allowed).
    pub require_trend: Option<bool>,
    /// Minimum `median(last n) / median(first n)` of the adjacent term.
    pub growth_ratio_min: Option<f64>,
    /// Grid point whose remainder sample is compared with the last one.
    pub stability_from_n: Option<usize>,
    /// Maximum |estimate − analytic| in Monte Carlo standard errors.
    pub z_max: Option<f64>,
    /// Maximum deviation of the sine Gram matrix from the identity.
    pub gram_tol: Option<f64>,
    /// Same for the signed-geometric basis.
    pub gram_tol_discrete: Option<f64>,
}

impl KernelBlock {
    pub fn truncation(&self) -> usize {
        self.truncation.unwrap_or_else(|| self.basis.default_truncation())
    }

    pub fn build(&self) -> Result<KernelSpec> {
        let basis = BasisSpec::new(self.basis, self.truncation());
        let kernel = match (&self.eigenvalues, self.terms.is_empty()) {
            (Some(_), false) => {
                return Err(Error::Config("kernel: `eigenvalues` and `terms` are mutually exclusive".into()))
            }
            (None, true) => return Err(Error::Config("kernel: one of `eigenvalues` or `terms` is required".into())),
            (Some(choice), true) => {
                let formula = match choice {
                    EigenChoice::Named(s) if s == "wiener" => EigenFormula::Wiener,
                    EigenChoice::Named(s) if s == "one_over_k" => EigenFormula::OneOverK,
                    EigenChoice::Named(s) => {
                        return Err(Error::Config(format!(
                            "kernel.eigenvalues: unknown formula `{s}` (expected \"wiener\", \"one_over_k\" or a list)"
                        )))
                    }
                    EigenChoice::List(v) => EigenFormula::Explicit(v.clone()),
                };
                KernelSpec::eigen(basis, self.order, formula)?
            }
            (None, false) => {
                KernelSpec::tensor(basis, self.order, self.terms.iter().map(|t| (t.index.clone(), t.value)))?
            }
        };
        Ok(match self.diagonal_beta {
            Some(beta) => kernel.with_diagonal_override(1.0 + beta),
            None => kernel,
        })
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        if self.kernel.basis.marginal() != self.process.marginal {
            return Err(Error::Config(format!(
                "kernel.basis `{}` is orthonormal under `{}`, but process.marginal is `{}`",
                self.kernel.basis.name(),
                self.kernel.basis.marginal().name(),
                self.process.marginal.name()
            )));
        }
        if self.n_grid.contains(&0) {
            return Err(Error::Config("n_grid: sample sizes must be positive".into()));
        }
        if self.n_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("n_grid: must be strictly increasing".into()));
        }
        Ok(())
    }

    pub fn process_spec(&self) -> ProcessSpec {
        ProcessSpec::new(self.process.kind, self.process.marginal, self.process.seed)
    }
}

/// Lowercase hex SHA-256 of the config bytes.
pub fn config_hash(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}
