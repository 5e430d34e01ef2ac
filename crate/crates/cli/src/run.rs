use std::fs;
use std::path::Path;

use copula_exo::exo_test::{prop1_bound, TermResult};
use copula_exo::simlab::{emit_table, run_sweep, RenderedTable, ScenarioMode};
use copula_exo::{
    hausman_test, instrument_exogeneity_test, prop1_factor, regressor_exogeneity_test, Dataset,
    ExogeneityReport, HausmanOutcome, Marginal, MonteCarloSummary, QuadratureRule, RngStream,
    ScenarioSpec, ScenarioSweep, TableLayout, TestOptions, VariableKind,
};
use serde_json::{json, Value};

use crate::config::{Command, OutputFormat, RunConfig};
use crate::error::CliError;
use crate::ingest::{ingest_csv, kind_warnings};
use crate::report::ReportDocument;

pub const THREADS_ENV: &str = "COPULA_EXO_THREADS";

/// Typed outcome of one command, kept next to its serialized form for
/// rendering.
#[derive(Debug, Clone)]
pub enum CommandResult {
    Exogeneity(ExogeneityReport),
    Hausman(HausmanOutcome),
    Simulation {
        layout: TableLayout,
        summaries: Vec<MonteCarloSummary>,
    },
    Factor {
        marginal: Marginal,
        factor: f64,
        bound: f64,
    },
}

#[derive(Debug, Clone)]
pub struct Execution {
    pub document: ReportDocument,
    pub result: CommandResult,
}

impl Execution {
    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Json => {
                let mut s = self.document.to_json();
                s.push('\n');
                s
            }
            OutputFormat::Text => render_text(&self.result),
            OutputFormat::Csv => render_csv(&self.result),
        }
    }
}

/// Executes `config` on a worker pool sized by `COPULA_EXO_THREADS`.
pub fn run(config: &RunConfig) -> Result<Execution, CliError> {
    config.validate()?;
    let threads = match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map_err(|_| CliError::Usage(format!("{THREADS_ENV} must be a non-negative integer")))?,
        Err(_) => 0,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start worker pool: {e}")))?;
    pool.install(|| dispatch(config))
}

fn dispatch(config: &RunConfig) -> Result<Execution, CliError> {
    let (result, value, warnings) = match config.command {
        Command::TestInstruments | Command::TestRegressor => run_exogeneity(config)?,
        Command::Hausman => run_hausman(config)?,
        Command::Simulate => run_simulation(config)?,
        Command::Factor => run_factor(config)?,
    };
    Ok(Execution {
        document: ReportDocument::new(config.clone(), value, warnings),
        result,
    })
}

type Outcome = (CommandResult, Value, Vec<String>);

fn load(config: &RunConfig) -> Result<Dataset, CliError> {
    let path = config
        .data_path
        .as_deref()
        .ok_or_else(|| CliError::Usage("--data is required".into()))?;
    ingest_csv(path, config)
}

fn options(config: &RunConfig) -> TestOptions {
    TestOptions {
        alpha: config.alpha,
        n_draws: config.draws,
        covariance: config.covariance,
    }
}

fn run_exogeneity(config: &RunConfig) -> Result<Outcome, CliError> {
    let dataset = load(config)?;
    let mut warnings = kind_warnings(&dataset, config);
    let rng = RngStream::new(config.effective_seed(), 0);
    let opts = options(config);
    let (report, tested): (_, Vec<(&[f64], VariableKind)>) = match config.command {
        Command::TestInstruments => (
            instrument_exogeneity_test(&dataset, &opts, &rng)?,
            dataset
                .instruments()
                .iter()
                .map(Vec::as_slice)
                .zip(dataset.instrument_kinds().iter().copied())
                .collect(),
        ),
        _ => (
            regressor_exogeneity_test(&dataset, &opts, &rng)?,
            vec![(dataset.p(), dataset.p_kind())],
        ),
    };
    // Raw-scale correlations use the sample's own distribution.
    let marginals = tested
        .iter()
        .map(|(col, kind)| match kind {
            VariableKind::Continuous => Marginal::empirical(col).map(Some),
            VariableKind::Discrete => Ok(None),
        })
        .collect::<Result<Vec<_>, _>>()?;
    let report = report.with_raw_correlations(&marginals)?;
    for t in &report.terms {
        if t.rho_star_out_of_range {
            warnings.push(format!(
                "estimated correlation for '{}' is {:.4}, outside [-1, 1]",
                t.label, t.rho_star
            ));
        }
    }
    let value = exogeneity_value(&report);
    Ok((CommandResult::Exogeneity(report), value, warnings))
}

/// Serialized report with explicit reject flags next to each p-value.
fn exogeneity_value(report: &ExogeneityReport) -> Value {
    let mut value = serde_json::to_value(report).expect("report is serializable");
    if let Some(terms) = value.get_mut("terms").and_then(Value::as_array_mut) {
        for (v, t) in terms.iter_mut().zip(&report.terms) {
            v["rejected"] = Value::Bool(t.wald.rejects(report.alpha));
        }
    }
    value["joint_rejected"] = Value::Bool(report.any_rejected());
    value
}

fn run_hausman(config: &RunConfig) -> Result<Outcome, CliError> {
    let dataset = load(config)?;
    let outcome = hausman_test(&dataset, &options(config))?;
    let mut warnings = Vec::new();
    if outcome.weak_first_stage {
        warnings.push(format!(
            "first-stage F = {:.2} is below 10; the instruments are weak",
            outcome.first_stage_f
        ));
    }
    let value = serde_json::to_value(&outcome).expect("outcome is serializable");
    Ok((CommandResult::Hausman(outcome), value, warnings))
}

/// A scenario file holds either a sweep (has a `layout` key) or one spec.
pub fn load_scenarios(path: &Path) -> Result<ScenarioSweep, CliError> {
    let text = fs::read_to_string(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => CliError::FileNotFound(path.to_path_buf()),
        _ => CliError::Malformed(format!("{}: {e}", path.display())),
    })?;
    let table: toml::Table = toml::from_str(&text).map_err(|e| CliError::Scenario(e.to_string()))?;
    if table.contains_key("layout") {
        toml::from_str(&text).map_err(|e| CliError::Scenario(e.to_string()))
    } else {
        let base: ScenarioSpec =
            toml::from_str(&text).map_err(|e| CliError::Scenario(e.to_string()))?;
        let layout = match base.mode {
            ScenarioMode::Instruments => TableLayout::Table1Style,
            ScenarioMode::Regressor => TableLayout::Table3Style,
        };
        Ok(ScenarioSweep {
            name: base.name.clone(),
            layout,
            base,
            eps_marginals: Vec::new(),
            rho_z_eps: Vec::new(),
            rho_p_eps: Vec::new(),
        })
    }
}

fn run_simulation(config: &RunConfig) -> Result<Outcome, CliError> {
    let path = config
        .scenario_path
        .as_deref()
        .ok_or_else(|| CliError::Usage("--scenario is required".into()))?;
    let mut sweep = load_scenarios(path)?;
    if let Some(reps) = config.reps {
        sweep = sweep.with_reps(reps);
    }
    if let Some(seed) = config.seed {
        sweep.base.seed = seed;
    }
    let summaries = run_sweep(&sweep)?;
    let table = emit_table(&summaries, sweep.layout)?;
    let value = json!({
        "name": sweep.name,
        "layout": sweep.layout,
        "table": { "header": table.header, "csv": table.to_csv() },
        "summaries": summaries,
    });
    Ok((
        CommandResult::Simulation {
            layout: sweep.layout,
            summaries,
        },
        value,
        Vec::new(),
    ))
}

fn run_factor(config: &RunConfig) -> Result<Outcome, CliError> {
    let marginal = config
        .marginal
        .clone()
        .ok_or_else(|| CliError::Usage("--marginal is required".into()))?
        .validated()?;
    let factor = prop1_factor(&marginal, &QuadratureRule::default())?;
    let bound = prop1_bound(&marginal)?;
    let value = json!({
        "marginal": marginal.label(),
        "factor": factor,
        "bound": bound,
    });
    Ok((
        CommandResult::Factor {
            marginal,
            factor,
            bound,
        },
        value,
        Vec::new(),
    ))
}

/// Re-executes a document's config and checks the statistics match.
pub fn replay(document: &ReportDocument) -> Result<bool, CliError> {
    let again = run(&document.config)?;
    Ok(again.document.statistics() == document.statistics())
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.4}")).unwrap_or_else(|| "-".into())
}

fn table_of(header: &[&str], rows: &[Vec<String>]) -> String {
    let widths: Vec<usize> = (0..header.len())
        .map(|j| {
            rows.iter()
                .map(|r| r[j].len())
                .chain([header[j].len()])
                .max()
                .unwrap_or(0)
        })
        .collect();
    let line = |cells: Vec<&str>| {
        let padded: Vec<String> = cells
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:>w$}"))
            .collect();
        padded.join("  ").trim_end().to_string() + "\n"
    };
    let mut out = line(header.to_vec());
    out.push_str(&"-".repeat(widths.iter().sum::<usize>() + 2 * (widths.len() - 1)));
    out.push('\n');
    for r in rows {
        out.push_str(&line(r.iter().map(String::as_str).collect()));
    }
    out
}

fn term_row(t: &TermResult, alpha: f64) -> Vec<String> {
    vec![
        t.label.clone(),
        format!("{:?}", t.kind).to_lowercase(),
        format!("{:.4}", t.rho_star),
        opt(t.rho_raw),
        format!("{:.4}", t.wald.statistic),
        t.wald.df.to_string(),
        format!("{:.4}", t.wald.p_value),
        if t.wald.rejects(alpha) { "yes" } else { "no" }.into(),
        format!("{:.3}", t.rejection_frequency),
    ]
}

fn render_text(result: &CommandResult) -> String {
    let mut out = String::new();
    match result {
        CommandResult::Exogeneity(r) => {
            let header = [
                "term", "kind", "rho_star", "rho_raw", "wald", "df", "p_value", "reject",
                "rej_freq",
            ];
            let mut rows: Vec<Vec<String>> = r.terms.iter().map(|t| term_row(t, r.alpha)).collect();
            rows.push(vec![
                "joint".into(),
                String::new(),
                String::new(),
                String::new(),
                format!("{:.4}", r.joint.statistic),
                r.joint.df.to_string(),
                format!("{:.4}", r.joint.p_value),
                if r.any_rejected() { "yes" } else { "no" }.into(),
                format!("{:.3}", r.joint_rejection_frequency),
            ]);
            out.push_str(&format!(
                "{:?} exogeneity test, alpha = {}, transform draws = {}\n\n",
                r.mode, r.alpha, r.n_discrete_draws
            ));
            out.push_str(&table_of(&header, &rows));
            if let Some(eta) = &r.eta_star_test {
                out.push_str(&format!(
                    "\nreduced-form residual score: t = {:.4}, p = {:.4}\n",
                    eta.t_statistic, eta.p_value
                ));
            }
            for n in &r.notes {
                out.push_str(&format!("note: {n}\n"));
            }
        }
        CommandResult::Hausman(h) => {
            out.push_str(&format!(
                "Hausman control-function test\n  coefficient  {:.4}\n  wald         {:.4} (df {})\n  p_value      {:.4}\n  reject       {}\n  first-stage F {:.2}\n",
                h.coefficient,
                h.wald.statistic,
                h.wald.df,
                h.wald.p_value,
                if h.rejected { "yes" } else { "no" },
                h.first_stage_f
            ));
        }
        CommandResult::Simulation { layout, summaries } => {
            match emit_table(summaries, *layout) {
                Ok(t) => out.push_str(&t.to_text()),
                Err(e) => out.push_str(&format!("{e}\n")),
            }
            let reps = summaries.first().map(|s| s.n_reps).unwrap_or(0);
            out.push_str(&format!("\n{} scenarios, {reps} replications each\n", summaries.len()));
        }
        CommandResult::Factor {
            marginal,
            factor,
            bound,
        } => {
            out.push_str(&format!(
                "marginal {}\nfactor   {factor:.10}\nbound    {bound:.10}\n",
                marginal.label()
            ));
        }
    }
    out
}

fn csv_line(fields: &[String]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(fields).expect("in-memory write");
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
}

fn render_csv(result: &CommandResult) -> String {
    let s = |v: &f64| v.to_string();
    match result {
        CommandResult::Exogeneity(r) => {
            let mut out = csv_line(
                &[
                    "term", "kind", "rho_star", "rho_raw", "statistic", "df", "p_value",
                    "rejected", "rejection_frequency",
                ]
                .map(String::from),
            );
            for t in &r.terms {
                out.push_str(&csv_line(&[
                    t.label.clone(),
                    format!("{:?}", t.kind).to_lowercase(),
                    s(&t.rho_star),
                    t.rho_raw.as_ref().map(s).unwrap_or_default(),
                    s(&t.wald.statistic),
                    t.wald.df.to_string(),
                    s(&t.wald.p_value),
                    t.wald.rejects(r.alpha).to_string(),
                    s(&t.rejection_frequency),
                ]));
            }
            out.push_str(&csv_line(&[
                "joint".into(),
                String::new(),
                String::new(),
                String::new(),
                s(&r.joint.statistic),
                r.joint.df.to_string(),
                s(&r.joint.p_value),
                r.any_rejected().to_string(),
                s(&r.joint_rejection_frequency),
            ]));
            out
        }
        CommandResult::Hausman(h) => {
            csv_line(
                &["coefficient", "statistic", "df", "p_value", "rejected", "first_stage_f"]
                    .map(String::from),
            ) + &csv_line(&[
                s(&h.coefficient),
                s(&h.wald.statistic),
                h.wald.df.to_string(),
                s(&h.wald.p_value),
                h.rejected.to_string(),
                s(&h.first_stage_f),
            ])
        }
        CommandResult::Simulation { layout, summaries } => emit_table(summaries, *layout)
            .as_ref()
            .map(RenderedTable::to_csv)
            .unwrap_or_default(),
        CommandResult::Factor {
            marginal,
            factor,
            bound,
        } => {
            csv_line(&["marginal", "factor", "bound"].map(String::from))
                + &csv_line(&[marginal.label(), s(factor), s(bound)])
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_factor_and_bound() {
        let config = RunConfig {
            marginal: Some(Marginal::Exponential { rate: 1.0 }),
            ..RunConfig::new(Command::Factor)
        };
        let exec = run(&config).unwrap();
        match exec.result {
            CommandResult::Factor { factor, bound, .. } => {
                assert!((bound - 2f64.sqrt()).abs() < 1e-12);
                assert!(factor > 0.0 && factor <= bound);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(exec.render(OutputFormat::Text).contains("bound    1.4142135624"));
        assert_eq!(exec.render(OutputFormat::Csv).lines().count(), 2);
    }

    #[test]
    fn heavy_tails_are_a_numerical_error() {
        let config = RunConfig {
            marginal: Some(Marginal::StudentT { df: 2.0 }),
            ..RunConfig::new(Command::Factor)
        };
        assert_eq!(run(&config).unwrap_err().exit_code(), crate::error::EXIT_NUMERICAL);
    }

    #[test]
    fn invalid_config_is_usage_error() {
        let config = RunConfig {
            alpha: 1.5,
            ..RunConfig::new(Command::Factor)
        };
        assert_eq!(run(&config).unwrap_err().exit_code(), crate::error::EXIT_USAGE);
    }
}
