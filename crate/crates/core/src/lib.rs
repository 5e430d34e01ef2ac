//! Gaussian-copula tests for the exogeneity of instrumental variables and
//! regressors in linear models.
//!
//! The pipeline maps raw columns to normal scores (`transform`), fits an
//! augmented OLS regression (`regress`), and turns the coefficients on the
//! normal scores into Wald tests of zero correlation with the structural
//! error (`exo_test`). `simlab` generates Gaussian-copula data and measures
//! rejection rates.

pub mod dataset;
pub mod error;
pub mod marginals;
pub mod regress;
pub mod simlab;
pub mod stat_core;
pub mod transform;

pub use dataset::{Dataset, VariableKind};
pub use error::{Error, ErrorCategory, Result};
pub use exo_test::{
    estimate_raw_correlations, hausman_test, instrument_exogeneity_test, prop1_factor,
    regressor_exogeneity_test, ExogeneityReport, HausmanOutcome, TestOptions,
};
pub use marginals::{EmpiricalCdf, Marginal};
pub use regress::{CovarianceKind, OlsFit, WaldOutcome};
pub use simlab::{MonteCarloSummary, ScenarioSpec, ScenarioSweep, TableLayout};
pub use stat_core::{QuadratureRule, RngStream};
