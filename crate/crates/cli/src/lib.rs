//! Command-line front end: CSV ingestion, test dispatch and report output.

pub mod args;
pub mod config;
pub mod error;
pub mod ingest;
pub mod report;
pub mod run;

pub use config::{Command, OutputFormat, RunConfig};
pub use error::CliError;
pub use ingest::ingest_csv;
pub use report::ReportDocument;
pub use run::{replay, run, CommandResult, Execution};
