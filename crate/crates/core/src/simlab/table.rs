use serde::{Deserialize, Serialize};

use super::{MonteCarloSummary, ScenarioMode};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TableLayout {
    /// Instrument test: one rejection column per instrument.
    Table1Style,
    /// Regressor test: copula and Hausman rejection columns.
    Table3Style,
}

impl TableLayout {
    fn mode(self) -> ScenarioMode {
        match self {
            TableLayout::Table1Style => ScenarioMode::Instruments,
            TableLayout::Table3Style => ScenarioMode::Regressor,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Cell {
    Text(String),
    Correlation(f64),
    Rate(f64),
}

/// A formatted rejection-rate table with CSV and aligned-text renderings.
#[derive(Debug, Clone, PartialEq)]
pub struct RenderedTable {
    pub header: Vec<String>,
    rows: Vec<Vec<Cell>>,
}

impl RenderedTable {
    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    /// RFC 4180 CSV; rates as fractions.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        push_csv_line(&mut out, self.header.iter().cloned());
        for row in &self.rows {
            push_csv_line(
                &mut out,
                row.iter().map(|c| match c {
                    Cell::Text(s) => s.clone(),
                    Cell::Correlation(v) | Cell::Rate(v) => format!("{v}"),
                }),
            );
        }
        out
    }

    /// Aligned text; rates as whole percentages, repeated error labels blanked.
    pub fn to_text(&self) -> String {
        let mut grid: Vec<Vec<String>> = vec![self.header.clone()];
        let mut previous: Option<&str> = None;
        for row in &self.rows {
            let mut line = Vec::with_capacity(row.len());
            for (j, c) in row.iter().enumerate() {
                line.push(match c {
                    Cell::Text(s) if j == 0 && previous == Some(s.as_str()) => String::new(),
                    Cell::Text(s) => s.clone(),
                    Cell::Correlation(v) => format!("{v:.2}"),
                    Cell::Rate(v) => format!("{:.0}%", 100.0 * v),
                });
            }
            if let Some(Cell::Text(s)) = row.first() {
                previous = Some(s.as_str());
            }
            grid.push(line);
        }
        let widths: Vec<usize> = (0..self.header.len())
            .map(|j| grid.iter().map(|r| r[j].chars().count()).max().unwrap_or(0))
            .collect();
        let mut out = String::new();
        for (i, row) in grid.iter().enumerate() {
            let cells: Vec<String> = row
                .iter()
                .zip(&widths)
                .map(|(c, w)| format!("{c:>w$}"))
                .collect();
            out.push_str(cells.join("  ").trim_end());
            out.push('\n');
            if i == 0 {
                let total = widths.iter().sum::<usize>() + 2 * widths.len().saturating_sub(1);
                out.push_str(&"-".repeat(total));
                out.push('\n');
            }
        }
        out
    }
}

fn push_csv_line(out: &mut String, fields: impl Iterator<Item = String>) {
    let quoted: Vec<String> = fields
        .map(|f| {
            if f.contains([',', '"', '\n']) {
                format!("\"{}\"", f.replace('"', "\"\""))
            } else {
                f
            }
        })
        .collect();
    out.push_str(&quoted.join(","));
    out.push('\n');
}

fn format_vector(values: &[f64]) -> String {
    let parts: Vec<String> = values.iter().map(|v| format!("{v}")).collect();
    format!("[{}]", parts.join(", "))
}

/// Lays out summaries one row each, grouped by error marginal in order of
/// first appearance.
pub fn emit_table(summaries: &[MonteCarloSummary], layout: TableLayout) -> Result<RenderedTable> {
    let first = summaries
        .first()
        .ok_or_else(|| Error::LayoutMismatch("no summaries to tabulate".into()))?;
    for s in summaries {
        if s.scenario.mode != layout.mode() {
            return Err(Error::LayoutMismatch(format!(
                "scenario '{}' is in {:?} mode, layout expects {:?}",
                s.scenario.name,
                s.scenario.mode,
                layout.mode()
            )));
        }
        if s.hypotheses != first.hypotheses {
            return Err(Error::LayoutMismatch(format!(
                "hypotheses {:?} differ from {:?}",
                s.hypotheses, first.hypotheses
            )));
        }
    }

    let mut header = vec!["eps_distribution".to_string()];
    match layout {
        TableLayout::Table1Style => header.push("rho_z_eps_star".into()),
        TableLayout::Table3Style => header.push("rho_p_eps_star".into()),
    }
    header.push("mean_rho_p_eps".into());
    header.extend(first.hypotheses.iter().map(|h| format!("reject_{h}")));

    let mut labels: Vec<String> = Vec::new();
    for s in summaries {
        let l = s.scenario.eps_marginal.label();
        if !labels.contains(&l) {
            labels.push(l);
        }
    }
    let mut rows = Vec::with_capacity(summaries.len());
    for label in &labels {
        for s in summaries.iter().filter(|s| &s.scenario.eps_marginal.label() == label) {
            let mut row = vec![Cell::Text(label.clone())];
            row.push(match layout {
                TableLayout::Table1Style => Cell::Text(format_vector(&s.scenario.rho_z_eps)),
                TableLayout::Table3Style => Cell::Correlation(s.scenario.rho_p_eps),
            });
            row.push(Cell::Correlation(s.mean_rho_p_eps));
            row.extend(s.rejection_rates.iter().map(|r| Cell::Rate(*r)));
            rows.push(row);
        }
    }
    Ok(RenderedTable { header, rows })
}
