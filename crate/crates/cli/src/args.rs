use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use copula_exo::{CovarianceKind, Marginal};

use crate::config::{Command, OutputFormat, RunConfig};
use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "copula-exo", version, about = "Copula-based exogeneity tests for linear models")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Cmd,
}

#[derive(Debug, Subcommand)]
pub enum Cmd {
    /// Test whether each instrument is uncorrelated with the structural error.
    TestInstruments(TestArgs),
    /// Test whether the endogenous regressor is exogenous, without instruments.
    TestRegressor(TestArgs),
    /// Control-function Durbin–Wu–Hausman test.
    Hausman(TestArgs),
    /// Run a Monte Carlo scenario or sweep from a TOML file.
    Simulate(SimulateArgs),
    /// Raw-scale correlation factor for a parametric marginal.
    Factor(FactorArgs),
    /// Re-run the config echoed in a JSON report and compare statistics.
    Replay {
        report: PathBuf,
    },
    /// Run a saved configuration (TOML or JSON).
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum)]
        format: Option<OutputFormat>,
    },
}

#[derive(Debug, Args)]
pub struct TestArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub outcome: String,
    #[arg(long)]
    pub endogenous: String,
    #[arg(long)]
    pub exogenous: Vec<String>,
    #[arg(long)]
    pub instrument: Vec<String>,
    /// Column to transform with the randomized discrete method.
    #[arg(long)]
    pub discrete: Vec<String>,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long, default_value_t = 100)]
    pub draws: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Heteroskedasticity-robust (HC1) standard errors.
    #[arg(long)]
    pub robust: bool,
    #[arg(long, value_enum, default_value_t)]
    pub format: OutputFormat,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub scenario: PathBuf,
    #[arg(long)]
    pub reps: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum, default_value_t)]
    pub format: OutputFormat,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Family {
    Normal,
    StudentT,
    Uniform,
    Exponential,
    Beta,
}

#[derive(Debug, Args)]
pub struct FactorArgs {
    #[arg(long, value_enum)]
    pub marginal: Family,
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
    pub mean: f64,
    #[arg(long, allow_negative_numbers = true, default_value_t = 1.0)]
    pub sd: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub df: Option<f64>,
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
    pub low: f64,
    #[arg(long, allow_negative_numbers = true, default_value_t = 1.0)]
    pub high: f64,
    #[arg(long, allow_negative_numbers = true, default_value_t = 1.0)]
    pub rate: f64,
    /// First beta shape parameter.
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.5)]
    pub shape_a: f64,
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.5)]
    pub shape_b: f64,
    #[arg(long, value_enum, default_value_t)]
    pub format: OutputFormat,
}

/// What `main` should do after parsing.
#[derive(Debug)]
pub enum Invocation {
    Execute(RunConfig),
    Replay(PathBuf),
}

impl TestArgs {
    fn into_config(self, command: Command) -> RunConfig {
        RunConfig {
            data_path: Some(self.data),
            outcome: Some(self.outcome),
            endogenous: Some(self.endogenous),
            exogenous: self.exogenous,
            instruments: self.instrument,
            discrete: self.discrete,
            alpha: self.alpha,
            draws: self.draws,
            seed: self.seed,
            output: self.format,
            covariance: if self.robust {
                CovarianceKind::HeteroskedasticHc1
            } else {
                CovarianceKind::Homoskedastic
            },
            ..RunConfig::new(command)
        }
    }
}

impl FactorArgs {
    fn marginal(&self) -> Result<Marginal, CliError> {
        let m = match self.marginal {
            Family::Normal => Marginal::normal(self.mean, self.sd),
            Family::StudentT => Marginal::student_t(
                self.df
                    .ok_or_else(|| CliError::Usage("--df is required for student-t".into()))?,
            ),
            Family::Uniform => Marginal::uniform(self.low, self.high),
            Family::Exponential => Marginal::exponential(self.rate),
            Family::Beta => Marginal::beta(self.shape_a, self.shape_b),
        };
        m.map_err(|e| CliError::Usage(e.to_string()))
    }
}

/// Reads a saved RunConfig; `.json` files are JSON, anything else TOML.
pub fn read_config(path: &std::path::Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|_| CliError::FileNotFound(path.into()))?;
    let parsed = if path.extension().is_some_and(|e| e == "json") {
        serde_json::from_str(&text).map_err(|e| e.to_string())
    } else {
        toml::from_str(&text).map_err(|e| e.to_string())
    };
    parsed.map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

impl Cli {
    pub fn into_invocation(self) -> Result<Invocation, CliError> {
        let config = match self.command {
            Cmd::TestInstruments(a) => a.into_config(Command::TestInstruments),
            Cmd::TestRegressor(a) => a.into_config(Command::TestRegressor),
            Cmd::Hausman(a) => a.into_config(Command::Hausman),
            Cmd::Simulate(a) => RunConfig {
                scenario_path: Some(a.scenario),
                reps: a.reps,
                seed: a.seed,
                output: a.format,
                ..RunConfig::new(Command::Simulate)
            },
            Cmd::Factor(a) => RunConfig {
                marginal: Some(a.marginal()?),
                output: a.format,
                ..RunConfig::new(Command::Factor)
            },
            Cmd::Replay { report } => return Ok(Invocation::Replay(report)),
            Cmd::Run { config, format } => {
                let mut c = read_config(&config)?;
                if let Some(f) = format {
                    c.output = f;
                }
                c
            }
        };
        Ok(Invocation::Execute(config))
    }
}
