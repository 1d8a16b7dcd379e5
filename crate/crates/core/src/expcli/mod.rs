//! Experiment runner: strict TOML configs in, CSV/JSON/SVG artifacts out.

pub mod check;
pub mod config;
pub mod runner;
pub mod svg;

pub use config::{config_hash, ExperimentConfig, StatisticKind};
pub use runner::{evaluate, run, write_artifacts, Check, DistanceRow, Report, RunOutcome, Series};

use crate::error::{Error, Result};

/// A built-in scenario: name, one-line description and config text.
#[derive(Debug, Clone, Copy)]
pub struct Scenario {
    pub name: &'static str,
    pub doc: &'static str,
    pub config: &'static str,
}

pub const SCENARIOS: [Scenario; 6] = [
    Scenario {
        name: "iid_vstat_wiener",
        doc: "iid uniform, Brownian kernel: V_n against its chaos limit over a growing n grid",
        config: include_str!("../../scenarios/iid_vstat_wiener.toml"),
    },
    Scenario {
        name: "dep_ustat_theorem1",
        doc: "1-dependent shift, Brownian kernel: U_n against the Hermite limit with covariance (3/2)I",
        config: include_str!("../../scenarios/dep_ustat_theorem1.toml"),
    },
    Scenario {
        name: "prop2_refute_eagleson",
        doc: "diagonal set to 1+beta: U_n against the offset law and against the plug-in chi-square law",
        config: include_str!("../../scenarios/prop2_refute_eagleson.toml"),
    },
    Scenario {
        name: "prop4_divergence",
        doc: "eigenvalues 1/k on the signed-geometric law: growing adjacent term, stable remainder",
        config: include_str!("../../scenarios/prop4_divergence.toml"),
    },
    Scenario {
        name: "covariance_check",
        doc: "analytic limit covariance against a Monte Carlo estimate from one long path",
        config: include_str!("../../scenarios/covariance_check.toml"),
    },
    Scenario {
        name: "ortho_check",
        doc: "Gram matrices of both bases against the identity",
        config: include_str!("../../scenarios/ortho_check.toml"),
    },
];

pub fn list_scenarios() -> &'static [Scenario] {
    &SCENARIOS
}

/// Looks up a built-in scenario, suggesting the closest name on a miss.
pub fn find_scenario(name: &str) -> Result<&'static Scenario> {
    SCENARIOS.iter().find(|s| s.name == name).ok_or_else(|| {
        let best = SCENARIOS
            .iter()
            .map(|s| (strsim::jaro_winkler(name, s.name), s.name))
            .max_by(|a, b| a.0.total_cmp(&b.0));
        Error::UnknownScenario {
            name: name.to_string(),
            suggestion: best.filter(|(score, _)| *score > 0.7).map(|(_, n)| n.to_string()),
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_builtins_parse_and_match_their_names() {
        assert_eq!(list_scenarios().len(), 6);
        for s in list_scenarios() {
            let cfg = ExperimentConfig::parse(s.config).unwrap();
            assert_eq!(cfg.scenario, s.name);
            cfg.kernel.build().unwrap();
        }
    }

    #[test]
    fn unknown_scenario_suggests() {
        match find_scenario("prop4_divergnce") {
            Err(Error::UnknownScenario { suggestion, .. }) => {
                assert_eq!(suggestion.as_deref(), Some("prop4_divergence"))
            }
            other => panic!("{other:?}"),
        }
        assert!(find_scenario("ortho_check").is_ok());
        let msg = find_scenario("orth_check").unwrap_err().to_string();
        assert!(msg.contains("did you mean"), "{msg}");
    }
}
