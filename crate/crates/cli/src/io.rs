//! File formats: dataset CSV, sample streams, transform CSV, predictions CSV and JSON artifacts.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use shapelet_core::{ClassLabel, LabeledDataset, Prediction, TimeSeries, TransformMatrix};

use crate::error::{CliError, Result};
use crate::number::fmt_g9;

pub const LABEL_COLUMN: &str = "label";

pub fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| CliError::io(path, e))
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

fn csv_error(path: &Path, e: csv::Error) -> CliError {
    let line = e.position().map(|p| p.line());
    match line {
        Some(line) => CliError::format(format!("{}:{line}: {e}", path.display())),
        None => CliError::format(format!("{}: {e}", path.display())),
    }
}

fn parse_sample(path: &Path, line: u64, field: &str) -> Result<f64> {
    match field.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(CliError::format(format!(
            "{}:{line}: `{field}` is not a finite number",
            path.display()
        ))),
    }
}

/// Reads a dataset CSV: label first, then samples. Rows may differ in length.
///
/// Series ids are the zero-based data row indices.
pub fn parse_dataset(path: &Path, bytes: &[u8], header: bool) -> Result<LabeledDataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(bytes);
    let mut data = LabeledDataset::default();
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = record.position().map_or(0, |p| p.line());
        if record.iter().all(str::is_empty) {
            continue;
        }
        let mut fields = record.iter();
        let label = ClassLabel::new(fields.next().unwrap_or_default())
            .map_err(|_| CliError::format(format!("{}:{line}: empty label", path.display())))?;
        let values = fields
            .filter(|f| !f.is_empty())
            .map(|f| parse_sample(path, line, f))
            .collect::<Result<Vec<f64>>>()?;
        if values.is_empty() {
            return Err(CliError::format(format!("{}:{line}: row has no samples", path.display())));
        }
        let series = TimeSeries::new(data.len().to_string(), values)?;
        data.push(series, label);
    }
    Ok(data)
}

/// Reads a stream file: one sample per line, blank lines ignored.
pub fn parse_stream(path: &Path, bytes: &[u8]) -> Result<Vec<f64>> {
    let text = std::str::from_utf8(bytes)
        .map_err(|e| CliError::format(format!("{}: not UTF-8: {e}", path.display())))?;
    let mut values = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if !line.is_empty() {
            values.push(parse_sample(path, i as u64 + 1, line)?);
        }
    }
    if values.is_empty() {
        return Err(CliError::format(format!("{}: no samples", path.display())));
    }
    Ok(values)
}

pub fn dataset_csv(data: &LabeledDataset) -> Vec<u8> {
    let mut out = String::new();
    for e in data.entries() {
        out.push_str(e.label.as_str());
        for &v in e.series.values() {
            out.push(',');
            out.push_str(&fmt_g9(v));
        }
        out.push('\n');
    }
    out.into_bytes()
}

/// Header `<shapelet ids...>,label`; the label closes each row.
pub fn transform_csv(m: &TransformMatrix) -> Vec<u8> {
    let mut out = String::new();
    for id in m.shapelet_ids() {
        out.push_str(id);
        out.push(',');
    }
    out.push_str(LABEL_COLUMN);
    out.push('\n');
    for (i, row) in m.iter_rows().enumerate() {
        for &v in row {
            out.push_str(&fmt_g9(v));
            out.push(',');
        }
        if let Some(labels) = m.labels() {
            out.push_str(labels[i].as_str());
        }
        out.push('\n');
    }
    out.into_bytes()
}

pub fn parse_transform(path: &Path, bytes: &[u8]) -> Result<TransformMatrix> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(bytes);
    let header = reader.headers().map_err(|e| csv_error(path, e))?.clone();
    let Some((last, ids)) = header.iter().collect::<Vec<_>>().split_last().map(|(l, i)| (*l, i.to_vec())) else {
        return Err(CliError::format(format!("{}: missing header", path.display())));
    };
    if last != LABEL_COLUMN {
        return Err(CliError::format(format!(
            "{}: last header column must be `{LABEL_COLUMN}`",
            path.display()
        )));
    }
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = record.position().map_or(0, |p| p.line());
        let fields: Vec<&str> = record.iter().collect();
        let (label, values) = fields.split_last().expect("csv enforces the header width");
        let label = ClassLabel::new(*label)
            .map_err(|_| CliError::format(format!("{}:{line}: empty label", path.display())))?;
        rows.push(
            values
                .iter()
                .map(|f| parse_sample(path, line, f))
                .collect::<Result<Vec<f64>>>()?,
        );
        labels.push(label);
    }
    Ok(TransformMatrix::new(
        rows,
        Some(labels),
        ids.into_iter().map(String::from).collect(),
    )?)
}

/// Header `row,label,prob(<class>)...`.
pub fn predictions_csv(classes: &[ClassLabel], predictions: &[Prediction]) -> Vec<u8> {
    let mut out = String::from("row,label");
    for c in classes {
        out.push_str(&format!(",prob({c})"));
    }
    out.push('\n');
    for (i, p) in predictions.iter().enumerate() {
        out.push_str(&format!("{i},{}", p.label));
        for c in classes {
            out.push(',');
            out.push_str(&fmt_g9(p.probability(c)));
        }
        out.push('\n');
    }
    out.into_bytes()
}

pub fn to_json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(value).expect("artifact serializes");
    bytes.push(b'\n');
    bytes
}

pub fn from_json<T: DeserializeOwned>(path: &Path, bytes: &[u8]) -> Result<T> {
    serde_json::from_slice(bytes).map_err(|e| CliError::format(format!("{}: {e}", path.display())))
}
