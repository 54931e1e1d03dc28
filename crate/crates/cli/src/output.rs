use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use nalgebra::DMatrix;
use serde::Serialize;
use subnet_core::simulator::LearningCurve;

use crate::commands::CliError;

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w).map_err(|e| CliError::io(path, e))?;
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

/// Row-major matrix without a header.
pub fn write_matrix_csv(path: &Path, m: &DMatrix<f64>) -> Result<(), CliError> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
    for row in m.row_iter() {
        w.write_record(row.iter().map(|v| v.to_string()))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn read_matrix_csv(path: &Path) -> Result<DMatrix<f64>, CliError> {
    let mut r = csv::ReaderBuilder::new().has_headers(false).from_path(path)?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for record in r.records() {
        let record = record?;
        let row = record
            .iter()
            .map(|s| s.trim().parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        rows.push(row);
    }
    subnet_core::linalg::from_rows(&rows)
        .ok_or_else(|| CliError::Usage(format!("{}: rows have unequal lengths", path.display())))
}

pub fn write_trace_csv(path: &Path, trace: &[f64]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["iteration", "objective"])?;
    for (i, f) in trace.iter().enumerate() {
        w.write_record([(i + 1).to_string(), f.to_string()])?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

/// Learning curve in dB, one row per `stride` iterations (the last
/// iteration is always written).
pub fn write_curve_csv(path: &Path, curve: &LearningCurve, stride: usize) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["iteration", "msd_wstar_db", "msd_wo_db"])?;
    let wstar = curve.msd_wstar_db();
    let wo = curve.msd_wo_db();
    let last = wstar.len() - 1;
    for i in (0..wstar.len()).filter(|i| (i + 1) % stride == 0 || *i == last) {
        w.write_record([(i + 1).to_string(), wstar[i].to_string(), wo[i].to_string()])?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn write_rows_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

/// File-name form of a step size, e.g. `1e-3`.
pub fn mu_tag(mu: f64) -> String {
    format!("{mu:e}")
}
