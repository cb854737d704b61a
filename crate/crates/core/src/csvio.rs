//! CSV reading and writing for tabular outputs.
//!
//! Plain RFC-4180 subset: comma separated, '.' decimal point, newline
//! terminated rows, no quoting (the values are all numeric).

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::eval::EvalReport;
use crate::matrix::Matrix;

/// Write a matrix, one row per line.
pub fn write_matrix_csv(path: &Path, m: &Matrix) -> Result<()> {
    let mut out = String::new();
    for i in 0..m.rows() {
        let row: Vec<String> = m.row(i).iter().map(|v| format!("{v}")).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Write per-sample features with a leading integer id column.
pub fn write_indexed_csv(path: &Path, ids: &[usize], m: &Matrix) -> Result<()> {
    if ids.len() != m.rows() {
        return Err(Error::shape("write_indexed_csv: id count does not match rows"));
    }
    let mut out = String::new();
    for (i, &id) in ids.iter().enumerate() {
        out.push_str(&format!("{id}"));
        for v in m.row(i) {
            out.push_str(&format!(",{v}"));
        }
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Read a numeric CSV into a matrix; every row must have the same width.
pub fn read_matrix_csv(path: &Path) -> Result<Matrix> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let row: std::result::Result<Vec<f64>, _> =
            line.split(',').map(|v| v.trim().parse::<f64>()).collect();
        let row = row.map_err(|_| {
            Error::parse(format!("{}:{}: malformed number", path.display(), lineno + 1))
        })?;
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(Error::parse(format!(
                    "{}:{}: expected {} columns, got {}",
                    path.display(),
                    lineno + 1,
                    first.len(),
                    row.len()
                )));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::parse(format!("{}: empty CSV", path.display())));
    }
    let (r, c) = (rows.len(), rows[0].len());
    Matrix::new(r, c, rows.into_iter().flatten().collect())
}

/// Read a one-column CSV of reals (e.g. a target spectrum, one band value
/// per line).
pub fn read_column_csv(path: &Path) -> Result<Vec<f64>> {
    let m = read_matrix_csv(path)?;
    if m.cols() != 1 {
        return Err(Error::parse(format!(
            "{}: expected a single column, got {}",
            path.display(),
            m.cols()
        )));
    }
    Ok(m.col(0))
}

/// Read a one-column CSV of nonnegative integers (labels).
pub fn read_label_csv(path: &Path) -> Result<Vec<usize>> {
    let vals = read_column_csv(path)?;
    vals.into_iter()
        .map(|v| {
            if v < 0.0 || v.fract() != 0.0 {
                Err(Error::parse(format!(
                    "{}: label {v} is not a nonnegative integer",
                    path.display()
                )))
            } else {
                Ok(v as usize)
            }
        })
        .collect()
}

/// Write labels, one per line.
pub fn write_label_csv(path: &Path, labels: &[usize]) -> Result<()> {
    let mut out = String::new();
    for l in labels {
        out.push_str(&format!("{l}\n"));
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Write an evaluation report:
/// `overall_accuracy` and `kappa` rows, one `per_class_accuracy` row, and
/// one `confusion_row` line per truth class.
pub fn write_report_csv(path: &Path, report: &EvalReport) -> Result<()> {
    let mut out = String::new();
    out.push_str(&format!("overall_accuracy,{}\n", report.overall_accuracy));
    out.push_str(&format!("kappa,{}\n", report.kappa));
    let accs: Vec<String> =
        report.per_class_accuracy.iter().map(|v| format!("{v}")).collect();
    out.push_str(&format!("per_class_accuracy,{}\n", accs.join(",")));
    for row in &report.confusion {
        let cells: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
        out.push_str(&format!("confusion_row,{}\n", cells.join(",")));
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}
