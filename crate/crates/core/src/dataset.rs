use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How a column is mapped to normal scores.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VariableKind {
    #[default]
    Continuous,
    Discrete,
}

/// Column-oriented observations for the model
/// `Y = β₀ + βᵀX + αP + ε` with instruments `Z` for `P`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    y: Vec<f64>,
    x: Vec<Vec<f64>>,
    p: Vec<f64>,
    z: Vec<Vec<f64>>,
    p_kind: VariableKind,
    z_kinds: Vec<VariableKind>,
    y_label: String,
    x_labels: Vec<String>,
    p_label: String,
    z_labels: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct DatasetBuilder {
    inner: Dataset,
}

impl DatasetBuilder {
    pub fn exogenous(mut self, label: impl Into<String>, column: Vec<f64>) -> Self {
        self.inner.x_labels.push(label.into());
        self.inner.x.push(column);
        self
    }

    pub fn instrument(
        mut self,
        label: impl Into<String>,
        column: Vec<f64>,
        kind: VariableKind,
    ) -> Self {
        self.inner.z_labels.push(label.into());
        self.inner.z.push(column);
        self.inner.z_kinds.push(kind);
        self
    }

    pub fn endogenous_kind(mut self, kind: VariableKind) -> Self {
        self.inner.p_kind = kind;
        self
    }

    pub fn build(self) -> Result<Dataset> {
        let d = self.inner;
        let n = d.y.len();
        if n == 0 {
            return Err(Error::EmptyInput);
        }
        let columns = std::iter::once((&d.y_label, &d.y))
            .chain(std::iter::once((&d.p_label, &d.p)))
            .chain(d.x_labels.iter().zip(&d.x))
            .chain(d.z_labels.iter().zip(&d.z));
        let mut seen = HashSet::new();
        for (label, column) in columns {
            if column.len() != n {
                return Err(Error::InvalidDataset(format!(
                    "column {label} has {} rows, expected {n}",
                    column.len()
                )));
            }
            if let Some(row) = column.iter().position(|v| !v.is_finite()) {
                return Err(Error::InvalidDataset(format!(
                    "column {label} has a non-finite value at row {row}"
                )));
            }
            if !seen.insert(label.as_str()) {
                return Err(Error::InvalidDataset(format!("duplicate column label {label}")));
            }
        }
        Ok(d)
    }
}

impl Dataset {
    pub fn builder(
        y_label: impl Into<String>,
        y: Vec<f64>,
        p_label: impl Into<String>,
        p: Vec<f64>,
    ) -> DatasetBuilder {
        DatasetBuilder {
            inner: Dataset {
                y,
                x: Vec::new(),
                p,
                z: Vec::new(),
                p_kind: VariableKind::Continuous,
                z_kinds: Vec::new(),
                y_label: y_label.into(),
                x_labels: Vec::new(),
                p_label: p_label.into(),
                z_labels: Vec::new(),
            },
        }
    }

    pub fn n_obs(&self) -> usize {
        self.y.len()
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn p(&self) -> &[f64] {
        &self.p
    }

    pub fn exogenous(&self) -> &[Vec<f64>] {
        &self.x
    }

    pub fn instruments(&self) -> &[Vec<f64>] {
        &self.z
    }

    pub fn p_kind(&self) -> VariableKind {
        self.p_kind
    }

    pub fn instrument_kinds(&self) -> &[VariableKind] {
        &self.z_kinds
    }

    pub fn y_label(&self) -> &str {
        &self.y_label
    }

    pub fn p_label(&self) -> &str {
        &self.p_label
    }

    pub fn exogenous_labels(&self) -> &[String] {
        &self.x_labels
    }

    pub fn instrument_labels(&self) -> &[String] {
        &self.z_labels
    }

    /// Copy of the dataset with the outcome replaced.
    pub fn with_outcome(&self, y: Vec<f64>) -> Result<Dataset> {
        let mut d = self.clone();
        d.y = y;
        DatasetBuilder { inner: d }.build()
    }

    /// Copy of the dataset with new kinds for the instrument columns.
    pub fn with_instrument_kinds(&self, kinds: Vec<VariableKind>) -> Result<Dataset> {
        if kinds.len() != self.z.len() {
            return Err(Error::InvalidDataset(format!(
                "{} kinds given for {} instruments",
                kinds.len(),
                self.z.len()
            )));
        }
        let mut d = self.clone();
        d.z_kinds = kinds;
        Ok(d)
    }
}
