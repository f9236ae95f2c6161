//! Reading and writing signals and partial linear model data.
//!
//! A signal file is either plain text with one number per line or a CSV
//! file with a single column and an optional header. Written files keep the
//! layout of the file that was read.

use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use nalgebra::DMatrix;
use thiserror::Error;

use crate::plm::PlmFit;

#[derive(Debug, Error)]
pub enum IoError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("line {line}: `{text}` is not a number")]
    Parse { line: usize, text: String },
    #[error("expected a single column, line {line} has {columns}")]
    Columns { line: usize, columns: usize },
    #[error("signal length {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("row {line} has {found} fields, expected {expected}")]
    Ragged {
        line: usize,
        found: usize,
        expected: usize,
    },
    #[error("no data rows")]
    Empty,
}

/// Layout of a signal file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SignalFormat {
    Lines,
    Csv { header: Option<String> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SignalFile {
    pub values: Vec<f64>,
    pub format: SignalFormat,
}

fn is_csv(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

/// Reads a signal, rejecting lengths that are not a power of two.
pub fn read_signal(path: &Path) -> Result<SignalFile, IoError> {
    let file = read_signal_any_length(path)?;
    let n = file.values.len();
    if n == 0 || !n.is_power_of_two() {
        return Err(IoError::NotPowerOfTwo(n));
    }
    Ok(file)
}

fn read_signal_any_length(path: &Path) -> Result<SignalFile, IoError> {
    if is_csv(path) {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .from_path(path)?;
        let mut values = Vec::new();
        let mut header = None;
        for (i, record) in reader.records().enumerate() {
            let record = record?;
            if record.len() != 1 {
                return Err(IoError::Columns {
                    line: i + 1,
                    columns: record.len(),
                });
            }
            let text = record[0].trim();
            match text.parse::<f64>() {
                Ok(v) => values.push(v),
                Err(_) if i == 0 => header = Some(text.to_string()),
                Err(_) => {
                    return Err(IoError::Parse {
                        line: i + 1,
                        text: text.to_string(),
                    })
                }
            }
        }
        Ok(SignalFile {
            values,
            format: SignalFormat::Csv { header },
        })
    } else {
        let reader = BufReader::new(File::open(path)?);
        let mut values = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            let text = line.trim();
            if text.is_empty() {
                continue;
            }
            let v = text.parse::<f64>().map_err(|_| IoError::Parse {
                line: i + 1,
                text: text.to_string(),
            })?;
            values.push(v);
        }
        Ok(SignalFile {
            values,
            format: SignalFormat::Lines,
        })
    }
}

/// Writes `values` in the given layout. Numbers use Rust's shortest
/// round-trip formatting, so reading the file back is lossless.
pub fn write_signal(path: &Path, values: &[f64], format: &SignalFormat) -> Result<(), IoError> {
    match format {
        SignalFormat::Lines => {
            let mut out = std::io::BufWriter::new(File::create(path)?);
            for v in values {
                writeln!(out, "{v}")?;
            }
            out.flush()?;
        }
        SignalFormat::Csv { header } => {
            let mut w = csv::Writer::from_path(path)?;
            if let Some(h) = header {
                w.write_record([h])?;
            }
            for v in values {
                w.write_record([v.to_string()])?;
            }
            w.flush()?;
        }
    }
    Ok(())
}

/// Reads a CSV whose first column is the response and whose remaining
/// columns are covariates. A non-numeric first row is taken as a header.
pub fn read_plm_csv(path: &Path) -> Result<(Vec<f64>, DMatrix<f64>), IoError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_path(path)?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let parsed: Result<Vec<f64>, _> = record.iter().map(|f| f.trim().parse::<f64>()).collect();
        match parsed {
            Ok(row) => {
                if let Some(first) = rows.first() {
                    if row.len() != first.len() {
                        return Err(IoError::Ragged {
                            line: i + 1,
                            found: row.len(),
                            expected: first.len(),
                        });
                    }
                }
                rows.push(row);
            }
            Err(_) if i == 0 => {}
            Err(_) => {
                let text = record.iter().collect::<Vec<_>>().join(",");
                return Err(IoError::Parse { line: i + 1, text });
            }
        }
    }
    let Some(first) = rows.first() else {
        return Err(IoError::Empty);
    };
    let p = first.len() - 1;
    let y = rows.iter().map(|r| r[0]).collect();
    let x = DMatrix::from_fn(rows.len(), p, |i, j| rows[i][j + 1]);
    Ok((y, x))
}

/// Writes a fit as CSV: a `beta` row with the coefficients, `sigma` and
/// `lambda` rows, then an `f_hat` header followed by one value per line.
pub fn write_plm_fit<W: Write>(fit: &PlmFit, out: W) -> Result<(), IoError> {
    let mut w = csv::WriterBuilder::new().flexible(true).from_writer(out);
    let mut beta = vec!["beta".to_string()];
    beta.extend(fit.beta_hat.iter().map(|b| b.to_string()));
    w.write_record(&beta)?;
    w.write_record(["sigma".to_string(), fit.sigma_hat.to_string()])?;
    w.write_record(["lambda".to_string(), fit.lambda.to_string()])?;
    w.write_record(["f_hat"])?;
    for v in &fit.f_hat {
        w.write_record([v.to_string()])?;
    }
    w.flush()?;
    Ok(())
}
