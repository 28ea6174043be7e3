//! CSV ingestion and training-segment imputation.

use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A column as read from disk. Missing cells hold `NaN`.
#[derive(Debug, Clone, PartialEq)]
pub struct RawSeries {
    pub values: Vec<f64>,
    pub missing: Vec<bool>,
}

impl RawSeries {
    pub fn from_values(values: Vec<f64>) -> Self {
        let missing = values.iter().map(|v| !v.is_finite()).collect();
        RawSeries { values, missing }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Reads `column` from a headed CSV file. Empty and `NaN` cells are marked
/// missing; imputation waits until the split is known.
pub fn load_series(path: &Path, column: &str) -> Result<RawSeries> {
    let file = std::fs::File::open(path)
        .map_err(|e| Error::invalid(format!("cannot open {}: {e}", path.display())))?;
    read_series(file, column)
}

/// Name of the first header field of a CSV file.
pub fn first_column(path: &Path) -> Result<String> {
    let file = std::fs::File::open(path)
        .map_err(|e| Error::invalid(format!("cannot open {}: {e}", path.display())))?;
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
    rdr.headers()?
        .get(0)
        .map(str::to_string)
        .ok_or_else(|| Error::invalid(format!("{} has no header", path.display())))
}

pub fn read_series<R: Read>(mut reader: R, column: &str) -> Result<RawSeries> {
    let mut text = String::new();
    reader.read_to_string(&mut text)?;
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = rdr.headers()?.clone();
    let col = headers
        .iter()
        .position(|h| h == column)
        .ok_or_else(|| Error::invalid(format!("column `{column}` not found in header")))?;
    // The csv reader drops blank lines, which in a one-column file are
    // missing cells, so that case is read line by line.
    let cells: Vec<String> = if headers.len() == 1 {
        let body: Vec<&str> = text.lines().skip(1).collect();
        let used = body.iter().rposition(|l| !l.trim().is_empty()).map_or(0, |p| p + 1);
        body[..used].iter().map(|l| l.trim().to_string()).collect()
    } else {
        let mut cells = Vec::new();
        for record in rdr.records() {
            cells.push(record?.get(col).unwrap_or("").to_string());
        }
        cells
    };
    let mut values = Vec::with_capacity(cells.len());
    let mut missing = Vec::with_capacity(cells.len());
    for (line, cell) in cells.iter().enumerate() {
        let value = if cell.is_empty() || cell.eq_ignore_ascii_case("nan") {
            f64::NAN
        } else {
            cell.parse::<f64>().map_err(|_| {
                Error::invalid(format!("row {}: `{cell}` is not a number", line + 1))
            })?
        };
        missing.push(!value.is_finite());
        values.push(value);
    }
    if values.is_empty() {
        return Err(Error::invalid("input has no data rows"));
    }
    Ok(RawSeries { values, missing })
}

/// What cleaning did to a series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CleanedSeries {
    pub values: Vec<f64>,
    /// Indices that were missing in the input.
    pub missing: Vec<usize>,
    /// Indices replaced as outliers.
    pub outliers: Vec<usize>,
    /// Replacement value: mean of the valid training values.
    pub fill_value: f64,
}

/// Replaces missing cells and outliers with the mean of the training segment
/// `values[..train_len]`. Outliers lie more than `outlier_std` standard
/// deviations from the training mean; `None` disables the check.
pub fn impute(raw: &RawSeries, train_len: usize, outlier_std: Option<f64>) -> Result<CleanedSeries> {
    if train_len == 0 || train_len > raw.len() {
        return Err(Error::invalid(format!(
            "training segment of {train_len} rows does not fit {} rows",
            raw.len()
        )));
    }
    let observed: Vec<f64> = raw.values[..train_len]
        .iter()
        .zip(&raw.missing)
        .filter(|(_, &m)| !m)
        .map(|(&v, _)| v)
        .collect();
    if observed.is_empty() {
        return Err(Error::invalid("training segment has no observed values"));
    }
    let (mean, std) = mean_std(&observed);

    let is_outlier = |v: f64| outlier_std.is_some_and(|k| (v - mean).abs() > k * std);
    let kept: Vec<f64> = observed.iter().copied().filter(|&v| !is_outlier(v)).collect();
    let fill_value = if kept.is_empty() { mean } else { mean_std(&kept).0 };

    let mut values = raw.values.clone();
    let mut missing = Vec::new();
    let mut outliers = Vec::new();
    for (k, v) in values.iter_mut().enumerate() {
        if raw.missing[k] {
            missing.push(k);
            *v = fill_value;
        } else if is_outlier(*v) {
            outliers.push(k);
            *v = fill_value;
        }
    }
    Ok(CleanedSeries {
        values,
        missing,
        outliers,
        fill_value,
    })
}

/// Mean and population standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}
