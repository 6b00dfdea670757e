// SPDX-License-Identifier: MIT OR Apache-2.0

use std::path::Path;

use w2cpd::cpd::StatTrace;
use w2cpd::TimeSeries;

use crate::error::{CliError, CliResult};

/// Marker written for trace entries outside the valid region.
pub const INVALID: &str = "NA";

/// Which columns of a delimited file hold what.
///
/// Without explicit names, a column called `t` or `time` is the time column,
/// one called `label` is the label column, and every other column is a value.
#[derive(Debug, Clone)]
pub struct ColumnMapping {
    pub time: Option<String>,
    pub values: Option<Vec<String>>,
    pub label: Option<String>,
    pub delimiter: u8,
    pub difference: bool,
}

impl Default for ColumnMapping {
    fn default() -> Self {
        Self {
            time: None,
            values: None,
            label: None,
            delimiter: b',',
            difference: false,
        }
    }
}

fn find(headers: &csv::StringRecord, name: &str, path: &Path) -> CliResult<usize> {
    headers
        .iter()
        .position(|h| h.trim() == name)
        .ok_or_else(|| CliError::Data(format!("{}: no column named '{name}'", path.display())))
}

pub fn ingest_csv(path: &Path, mapping: &ColumnMapping) -> CliResult<TimeSeries> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(mapping.delimiter)
        .has_headers(true)
        .from_path(path)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    let headers = reader
        .headers()
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?
        .clone();
    if headers.is_empty() {
        return Err(CliError::Data(format!("{}: empty file", path.display())));
    }

    let implicit = |names: &[&str]| headers.iter().position(|h| names.contains(&h.trim()));
    let time = match &mapping.time {
        Some(name) => Some(find(&headers, name, path)?),
        None => implicit(&["t", "time"]),
    };
    let label = match &mapping.label {
        Some(name) => Some(find(&headers, name, path)?),
        None => implicit(&["label"]),
    };
    let values: Vec<usize> = match &mapping.values {
        Some(names) => names
            .iter()
            .map(|n| find(&headers, n, path))
            .collect::<CliResult<_>>()?,
        None => (0..headers.len())
            .filter(|&i| Some(i) != time && Some(i) != label)
            .collect(),
    };
    if values.is_empty() {
        return Err(CliError::Data(format!(
            "{}: no value columns",
            path.display()
        )));
    }

    let mut data = Vec::new();
    let mut labels = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            CliError::Data(format!("{}: line {line}: {e}", path.display()))
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let cell = |i: usize| -> CliResult<&str> {
            record.get(i).map(str::trim).ok_or_else(|| {
                CliError::Data(format!(
                    "{}: line {line}: missing column {}",
                    path.display(),
                    i + 1
                ))
            })
        };
        let mut row = Vec::with_capacity(values.len());
        for &i in &values {
            let text = cell(i)?;
            let v: f64 = text.parse().map_err(|_| {
                CliError::Data(format!(
                    "{}: line {line}: column '{}': '{text}' is not a number",
                    path.display(),
                    &headers[i]
                ))
            })?;
            row.push(v);
        }
        data.push(row);
        if let Some(i) = label {
            let text = cell(i)?;
            labels.push(text.parse::<i64>().map_err(|_| {
                CliError::Data(format!(
                    "{}: line {line}: label '{text}' is not an integer",
                    path.display()
                ))
            })?);
        }
    }

    let mut series =
        TimeSeries::new(data).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    if label.is_some() {
        series = series.with_labels(labels)?;
    }
    if mapping.difference {
        series = series.difference()?;
    }
    Ok(series)
}

/// One non-negative integer per line; blank lines are skipped.
pub fn read_indices(path: &Path) -> CliResult<Vec<usize>> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(n, l)| {
            l.trim().parse().map_err(|_| {
                CliError::Data(format!(
                    "{}: line {}: '{}' is not an index",
                    path.display(),
                    n + 1,
                    l.trim()
                ))
            })
        })
        .collect()
}

/// Reads a trace file, preferring the filtered column when it has values.
pub fn read_trace(path: &Path, beta: usize) -> CliResult<StatTrace> {
    let mut reader = csv::Reader::from_path(path)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    let mut raw = Vec::new();
    let mut filtered = Vec::new();
    let parse = |s: &str, line: u64| -> CliResult<f64> {
        if s == INVALID {
            Ok(f64::NAN)
        } else {
            s.parse().map_err(|_| {
                CliError::Data(format!(
                    "{}: line {line}: '{s}' is not a number",
                    path.display()
                ))
            })
        }
    };
    for record in reader.records() {
        let record = record.map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != 3 {
            return Err(CliError::Data(format!(
                "{}: line {line}: expected t,sigma_raw,sigma_filtered",
                path.display()
            )));
        }
        raw.push(parse(&record[1], line)?);
        filtered.push(parse(&record[2], line)?);
    }
    let is_filtered = filtered.iter().any(|v| !v.is_nan());
    let values = if is_filtered { filtered } else { raw };
    let start = values.iter().position(|v| !v.is_nan()).unwrap_or(0);
    let end = values
        .iter()
        .rposition(|v| !v.is_nan())
        .map_or(start, |e| e + 1);
    Ok(StatTrace::new(values, beta, start..end, is_filtered)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn file(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn accelerometer_with_labels() {
        let f = file("time,ax,ay,az,label\n0,1,2,3,0\n1,4,5,6,1\n");
        let s = ingest_csv(f.path(), &ColumnMapping::default()).unwrap();
        assert_eq!(s.dim(), 3);
        assert_eq!(s.len(), 2);
        assert_eq!(s.labels(), Some(&[0i64, 1][..]));
        assert_eq!(s.sample(1), &[4.0, 5.0, 6.0]);
    }

    #[test]
    fn single_column() {
        let f = file("x\n1.5\n2.5\n");
        let s = ingest_csv(f.path(), &ColumnMapping::default()).unwrap();
        assert_eq!(s.dim(), 1);
        assert_eq!(s.channel(0), vec![1.5, 2.5]);
    }

    #[test]
    fn header_only_is_empty_series() {
        let f = file("x,y\n");
        let err = ingest_csv(f.path(), &ColumnMapping::default()).unwrap_err();
        assert!(err.to_string().ends_with("empty series"), "{err}");
        let f = file("");
        assert!(ingest_csv(f.path(), &ColumnMapping::default()).is_err());
    }

    #[test]
    fn bad_cells_report_lines() {
        let f = file("x\n1\n2\nabc\n");
        let err = ingest_csv(f.path(), &ColumnMapping::default()).unwrap_err();
        assert!(err.to_string().contains("line 4"), "{err}");
        assert_eq!(err.exit_code(), 2);
        let f = file("x,y\n1,2\n3\n");
        let err = ingest_csv(f.path(), &ColumnMapping::default()).unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
    }

    #[test]
    fn explicit_mapping_and_difference() {
        let f = file("a;b;c\n1;10;0\n4;20;0\n9;40;1\n");
        let mapping = ColumnMapping {
            values: Some(vec!["b".into()]),
            label: Some("c".into()),
            delimiter: b';',
            difference: true,
            ..Default::default()
        };
        let s = ingest_csv(f.path(), &mapping).unwrap();
        assert_eq!(s.channel(0), vec![10.0, 20.0]);
        assert_eq!(s.labels(), Some(&[0i64, 1][..]));
        let missing = ColumnMapping {
            values: Some(vec!["zz".into()]),
            delimiter: b';',
            ..Default::default()
        };
        assert!(ingest_csv(f.path(), &missing).is_err());
    }

    #[test]
    fn indices_and_traces() {
        let f = file("3\n\n10\n");
        assert_eq!(read_indices(f.path()).unwrap(), vec![3, 10]);
        let f = file("3\nx\n");
        assert!(read_indices(f.path()).is_err());

        let f = file("t,sigma_raw,sigma_filtered\n0,NA,NA\n1,0.5,NA\n2,0.7,NA\n3,NA,NA\n");
        let trace = read_trace(f.path(), 1).unwrap();
        assert!(!trace.is_filtered());
        assert_eq!(trace.valid_range(), 1..3);
        assert_eq!(trace.get(2), Some(0.7));
    }
}
