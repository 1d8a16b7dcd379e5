//! Canonical U- and V-statistics of stationary weakly dependent sequences.
//!
//! * [`ortho_basis`]: closed-form orthonormal bases with `e_0 ≡ 1`.
//! * [`kernel`]: canonical kernels as coefficient tensors or eigen-series.
//! * [`process`]: stationary generators with analytic mixing profiles.
//! * [`ustat_engine`]: naive and partition-factored statistic evaluators.
//! * [`limit_law`]: Hermite polynomials, limit covariances and limit-law samplers.
//! * [`diagnostics`]: two-sample distances and convergence tables.
//! * [`expcli`]: scenario configs, the experiment runner and its artifacts.

pub mod diagnostics;
pub mod error;
pub mod expcli;
pub mod kernel;
pub mod limit_law;
pub mod numerics;
pub mod ortho_basis;
pub mod parallel;
pub mod process;
pub mod rng;
pub mod ustat_engine;

pub use error::{Error, Result};
