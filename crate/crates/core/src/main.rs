use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use uvstat_core::expcli::{self, check};
use uvstat_core::Result;

#[derive(Parser)]
#[command(name = "uvstat", version, about = "Canonical U- and V-statistics of weakly dependent sequences")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario from a config file or a built-in name.
    Run {
        /// TOML config; defaults to the built-in config of --scenario.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Built-in scenario name (overrides the config's `scenario`).
        #[arg(long)]
        scenario: Option<String>,
        /// Master seed (overrides `process.seed`).
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads for replicate evaluation.
        #[arg(long)]
        workers: Option<usize>,
    },
    /// List built-in scenarios.
    List,
    /// Run the orthonormality, covariance and partition-oracle suites.
    Check,
}

fn run(cmd: Command) -> Result<bool> {
    match cmd {
        Command::List => {
            for s in expcli::list_scenarios() {
                println!("{:<24} {}", s.name, s.doc);
            }
            Ok(true)
        }
        Command::Check => {
            let checks = check::run_all()?;
            for c in &checks {
                let tag = if c.pass { "PASS" } else { "FAIL" };
                println!("{tag} {:<40} {:e} {} {:e}", c.name, c.value, c.comparison, c.threshold);
            }
            Ok(checks.iter().all(|c| c.pass))
        }
        Command::Run { config, scenario, seed, out, workers } => {
            let (text, scenario_override) = match (&config, &scenario) {
                (Some(path), _) => (std::fs::read_to_string(path)?, scenario.as_deref()),
                (None, Some(name)) => (expcli::find_scenario(name)?.config.to_string(), None),
                (None, None) => {
                    return Err(uvstat_core::Error::Config("run needs --config or --scenario".into()))
                }
            };
            let outcome = expcli::run(&text, scenario_override, seed, out.as_deref(), workers)?;
            println!(
                "{} {} (config_sha256={})",
                if outcome.pass { "PASS" } else { "FAIL" },
                outcome.out_dir.display(),
                outcome.config_sha256
            );
            Ok(outcome.pass)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
