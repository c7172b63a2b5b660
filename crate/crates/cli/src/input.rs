//! CSV ingestion: a header row, columns selected by name, `.` decimals.

use std::io::Read;
use std::path::Path;

use srsd_core::TimeSeries;

use crate::error::{CliError, Result};

/// Reads the named value columns (and optional label column) from a CSV file.
pub fn read_columns(
    path: &Path,
    columns: &[String],
    labels: Option<&str>,
) -> Result<Vec<TimeSeries>> {
    let file = std::fs::File::open(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_columns(file, columns, labels)
}

pub fn parse_columns<R: Read>(
    reader: R,
    columns: &[String],
    labels: Option<&str>,
) -> Result<Vec<TimeSeries>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers().map_err(data_error)?.clone();
    let locate = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::Data(format!("missing column '{name}'")))
    };
    let value_idx: Vec<usize> = columns.iter().map(|c| locate(c)).collect::<Result<_>>()?;
    let label_idx = labels.map(locate).transpose()?;

    let mut values: Vec<Vec<f64>> = vec![Vec::new(); columns.len()];
    let mut label_values = Vec::new();
    for (k, record) in rdr.records().enumerate() {
        let record = record.map_err(data_error)?;
        let row = k + 1;
        let cell = |idx: usize, name: &str| -> Result<f64> {
            let text = record.get(idx).unwrap_or("");
            let v: f64 = text.parse().map_err(|_| {
                CliError::Data(format!(
                    "row {row}: column '{name}': cannot parse {text:?} as a number"
                ))
            })?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(CliError::Data(format!(
                    "row {row}: column '{name}': non-finite value {text:?}"
                )))
            }
        };
        for ((out, &idx), name) in values.iter_mut().zip(&value_idx).zip(columns) {
            out.push(cell(idx, name)?);
        }
        if let (Some(idx), Some(name)) = (label_idx, labels) {
            label_values.push(cell(idx, name)?);
        }
    }
    if values.first().is_none_or(|v| v.is_empty()) {
        return Err(CliError::Data("no observations".into()));
    }
    values
        .into_iter()
        .zip(columns)
        .map(|(v, name)| {
            let s = TimeSeries::new(v)?.named(name.clone());
            Ok(if label_idx.is_some() {
                s.labelled(label_values.clone())?
            } else {
                s
            })
        })
        .collect()
}

fn data_error(e: csv::Error) -> CliError {
    let msg = match e.kind() {
        csv::ErrorKind::UnequalLengths {
            pos,
            expected_len,
            len,
        } => {
            let row = pos.as_ref().map_or(0, |p| p.record());
            format!("row {row}: expected {expected_len} fields, found {len}")
        }
        _ => e.to_string(),
    };
    CliError::Data(msg)
}
