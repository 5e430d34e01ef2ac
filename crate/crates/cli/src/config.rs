use std::path::PathBuf;

use copula_exo::{CovarianceKind, Marginal};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const DEFAULT_SEED: u64 = 20_240_601;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    TestInstruments,
    TestRegressor,
    Hausman,
    Simulate,
    Factor,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Text,
    Json,
    Csv,
}

/// Everything needed to reproduce one invocation. Echoed into every report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    #[serde(default)]
    pub data_path: Option<PathBuf>,
    #[serde(default)]
    pub outcome: Option<String>,
    #[serde(default)]
    pub endogenous: Option<String>,
    #[serde(default)]
    pub exogenous: Vec<String>,
    #[serde(default)]
    pub instruments: Vec<String>,
    /// Columns to treat with the randomized discrete transform.
    #[serde(default)]
    pub discrete: Vec<String>,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_draws")]
    pub draws: usize,
    /// Seed for transform draws; for `simulate`, overrides the scenario seed
    /// when set.
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub output: OutputFormat,
    #[serde(default)]
    pub scenario_path: Option<PathBuf>,
    #[serde(default)]
    pub reps: Option<usize>,
    #[serde(default)]
    pub covariance: CovarianceKind,
    /// Marginal for the `factor` command.
    #[serde(default)]
    pub marginal: Option<Marginal>,
}

fn default_alpha() -> f64 {
    0.05
}

fn default_draws() -> usize {
    100
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        RunConfig {
            command,
            data_path: None,
            outcome: None,
            endogenous: None,
            exogenous: Vec::new(),
            instruments: Vec::new(),
            discrete: Vec::new(),
            alpha: default_alpha(),
            draws: default_draws(),
            seed: None,
            output: OutputFormat::default(),
            scenario_path: None,
            reps: None,
            covariance: CovarianceKind::default(),
            marginal: None,
        }
    }

    pub fn effective_seed(&self) -> u64 {
        self.seed.unwrap_or(DEFAULT_SEED)
    }

    /// Every column the command reads, in role order.
    pub fn used_columns(&self) -> Vec<&str> {
        self.outcome
            .iter()
            .chain(&self.endogenous)
            .chain(&self.exogenous)
            .chain(&self.instruments)
            .map(String::as_str)
            .collect()
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let usage = |m: String| Err(CliError::Usage(m));
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return usage(format!("--alpha must be in (0, 1), got {}", self.alpha));
        }
        if self.draws == 0 {
            return usage("--draws must be positive".into());
        }
        match self.command {
            Command::TestInstruments | Command::TestRegressor | Command::Hausman => {
                if self.data_path.is_none() {
                    return usage("--data is required".into());
                }
                if self.outcome.is_none() || self.endogenous.is_none() {
                    return usage("--outcome and --endogenous are required".into());
                }
                if self.command != Command::TestRegressor && self.instruments.is_empty() {
                    return usage("at least one --instrument is required".into());
                }
                let used = self.used_columns();
                for (i, a) in used.iter().enumerate() {
                    if used[..i].contains(a) {
                        return usage(format!("column '{a}' is assigned more than one role"));
                    }
                }
                for d in &self.discrete {
                    let tested = self.endogenous.as_deref() == Some(d.as_str())
                        || self.instruments.contains(d);
                    if !tested {
                        return usage(format!(
                            "--discrete '{d}' must name the endogenous column or an instrument"
                        ));
                    }
                }
            }
            Command::Simulate => {
                if self.scenario_path.is_none() {
                    return usage("--scenario is required".into());
                }
                if self.reps == Some(0) {
                    return usage("--reps must be positive".into());
                }
            }
            Command::Factor => {
                if self.marginal.is_none() {
                    return usage("--marginal is required".into());
                }
            }
        }
        Ok(())
    }
}
