use std::process::ExitCode;

use clap::Parser;
use copula_exo_cli::args::{Cli, Invocation};
use copula_exo_cli::error::{CliError, EXIT_NUMERICAL, EXIT_OK};
use copula_exo_cli::{replay, run, ReportDocument};

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let code = match execute(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}

fn execute(cli: Cli) -> Result<i32, CliError> {
    match cli.into_invocation()? {
        Invocation::Execute(config) => {
            let exec = run(&config)?;
            for w in &exec.document.warnings {
                log::warn!("{w}");
            }
            print!("{}", exec.render(config.output));
            Ok(EXIT_OK)
        }
        Invocation::Replay(path) => {
            let text = std::fs::read_to_string(&path)
                .map_err(|_| CliError::FileNotFound(path.clone()))?;
            let doc = ReportDocument::from_json(&text)
                .map_err(|e| CliError::Malformed(format!("{}: {e}", path.display())))?;
            if replay(&doc)? {
                println!("reproduced: statistics match {}", path.display());
                Ok(EXIT_OK)
            } else {
                eprintln!("statistics differ from {}", path.display());
                Ok(EXIT_NUMERICAL)
            }
        }
    }
}
