use std::collections::HashSet;
use std::fs::File;
use std::path::Path;

use copula_exo::transform::distinct_values;
use copula_exo::{Dataset, VariableKind};

use crate::config::RunConfig;
use crate::error::CliError;

/// Reads the columns named in `config` from a CSV file with a header row.
/// Row numbers in errors count data rows from 1.
pub fn ingest_csv(path: &Path, config: &RunConfig) -> Result<Dataset, CliError> {
    let file = File::open(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => CliError::FileNotFound(path.to_path_buf()),
        _ => CliError::Malformed(format!("{}: {e}", path.display())),
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(file);
    let header = reader
        .headers()
        .map_err(|e| CliError::Malformed(e.to_string()))?
        .clone();

    let used = config.used_columns();
    let mut index = Vec::with_capacity(used.len());
    for name in &used {
        let i = header
            .iter()
            .position(|h| h == *name)
            .ok_or_else(|| CliError::MissingColumn(name.to_string()))?;
        index.push(i);
    }

    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); used.len()];
    for (r, record) in reader.records().enumerate() {
        let row = r + 1;
        let record = record.map_err(|e| CliError::Malformed(format!("row {row}: {e}")))?;
        for ((col, &i), name) in columns.iter_mut().zip(&index).zip(&used) {
            let cell = record.get(i).unwrap_or("");
            if cell.is_empty() {
                return Err(CliError::MissingValue {
                    row,
                    column: name.to_string(),
                });
            }
            let value: f64 = cell
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite())
                .ok_or_else(|| CliError::Parse {
                    row,
                    column: name.to_string(),
                    value: cell.to_string(),
                })?;
            col.push(value);
        }
    }

    let discrete: HashSet<&str> = config.discrete.iter().map(String::as_str).collect();
    let kind = |name: &str| {
        if discrete.contains(name) {
            VariableKind::Discrete
        } else {
            VariableKind::Continuous
        }
    };
    let mut columns = columns.into_iter();
    let y = columns.next().unwrap_or_default();
    let p = columns.next().unwrap_or_default();
    let outcome = config.outcome.as_deref().unwrap_or("y");
    let endogenous = config.endogenous.as_deref().unwrap_or("p");
    let mut builder = Dataset::builder(outcome, y, endogenous, p).endogenous_kind(kind(endogenous));
    for name in &config.exogenous {
        builder = builder.exogenous(name.clone(), columns.next().unwrap_or_default());
    }
    for name in &config.instruments {
        builder = builder.instrument(name.clone(), columns.next().unwrap_or_default(), kind(name));
    }
    Ok(builder.build()?)
}

/// Warnings for tested columns that look like dummies but were left
/// continuous. Kinds are never switched automatically.
pub fn kind_warnings(dataset: &Dataset, config: &RunConfig) -> Vec<String> {
    let mut tested: Vec<(&str, &[f64], VariableKind)> = Vec::new();
    if config.command != crate::config::Command::TestInstruments {
        tested.push((dataset.p_label(), dataset.p(), dataset.p_kind()));
    }
    if config.command == crate::config::Command::TestInstruments {
        for ((label, col), kind) in dataset
            .instrument_labels()
            .iter()
            .zip(dataset.instruments())
            .zip(dataset.instrument_kinds())
        {
            tested.push((label, col, *kind));
        }
    }
    tested
        .into_iter()
        .filter(|(_, col, kind)| *kind == VariableKind::Continuous && distinct_values(col) <= 2)
        .map(|(label, _, _)| {
            format!("column '{label}' has at most two distinct values; consider --discrete {label}")
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use std::io::Write;

    use super::*;
    use crate::config::Command;

    fn fixture(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    fn roles() -> RunConfig {
        RunConfig {
            outcome: Some("y".into()),
            endogenous: Some("p".into()),
            exogenous: vec!["x".into()],
            instruments: vec!["z1".into()],
            ..RunConfig::new(Command::TestInstruments)
        }
    }

    #[test]
    fn reads_declared_roles() {
        let f = fixture("y,x,p,z1\n1,2,3,4\n5,6,7,8\n9,10,11,12\n");
        let d = ingest_csv(f.path(), &roles()).unwrap();
        assert_eq!(d.n_obs(), 3);
        assert_eq!(d.exogenous().len(), 1);
        assert_eq!(d.instruments().len(), 1);
        assert_eq!(d.p(), &[3.0, 7.0, 11.0]);
        assert_eq!(d.instruments()[0], vec![4.0, 8.0, 12.0]);
    }

    #[test]
    fn missing_column() {
        let f = fixture("y,x,p\n1,2,3\n");
        assert!(matches!(
            ingest_csv(f.path(), &roles()),
            Err(CliError::MissingColumn(c)) if c == "z1"
        ));
    }

    #[test]
    fn parse_error_has_coordinates() {
        let f = fixture("y,x,p,z1\n1,2,3,4\n5,abc,7,8\n");
        match ingest_csv(f.path(), &roles()) {
            Err(CliError::Parse { row, column, value }) => {
                assert_eq!((row, column.as_str(), value.as_str()), (2, "x", "abc"));
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn empty_cell_is_missing_value() {
        let f = fixture("y,x,p,z1\n1,,3,4\n");
        assert!(matches!(
            ingest_csv(f.path(), &roles()),
            Err(CliError::MissingValue { row: 1, .. })
        ));
    }

    #[test]
    fn unused_columns_may_be_anything() {
        let f = fixture("y,x,p,z1,notes\n1,2,3,4,hello\n5,6,7,8,\n");
        assert_eq!(ingest_csv(f.path(), &roles()).unwrap().n_obs(), 2);
    }

    #[test]
    fn absent_file() {
        let err = ingest_csv(Path::new("/nonexistent/data.csv"), &roles()).unwrap_err();
        assert!(matches!(err, CliError::FileNotFound(_)));
        assert_eq!(err.exit_code(), crate::error::EXIT_DATA);
    }

    #[test]
    fn dummy_instrument_warning() {
        let f = fixture("y,x,p,z1\n1,2,3,0\n5,6,7,1\n9,1,11,1\n");
        let d = ingest_csv(f.path(), &roles()).unwrap();
        assert_eq!(kind_warnings(&d, &roles()).len(), 1);
        let declared = RunConfig {
            discrete: vec!["z1".into()],
            ..roles()
        };
        let d = ingest_csv(f.path(), &declared).unwrap();
        assert_eq!(d.instrument_kinds(), &[VariableKind::Discrete]);
        assert!(kind_warnings(&d, &declared).is_empty());
    }
}
