//! Per-grid-point aggregates of experiment results.

use std::path::Path;

use diknn_core::{DiMethod, Direction};

use crate::error::{CliError, Result};
use crate::experiment::{ResultRow, RESULT_COLUMNS};

pub const SUMMARY_COLUMNS: [&str; 10] = [
    "sweep_value",
    "method",
    "direction",
    "trials",
    "mean_nats",
    "std_nats",
    "mean_bits",
    "std_bits",
    "significant_fraction",
    "mean_m_used",
];

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub sweep_value: f64,
    pub method: DiMethod,
    pub direction: Direction,
    pub trials: usize,
    pub mean_nats: f64,
    /// Sample standard deviation; zero for a single trial.
    pub std_nats: f64,
    pub mean_bits: f64,
    pub std_bits: f64,
    pub significant_fraction: Option<f64>,
    pub mean_m_used: f64,
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

pub fn sample_std(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let m = mean(values);
    (values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (values.len() - 1) as f64).sqrt()
}

/// One row per (grid value, method, direction), in order of first appearance.
pub fn summarize(rows: &[ResultRow]) -> Vec<SummaryRow> {
    let mut groups: Vec<((u64, DiMethod, Direction), Vec<&ResultRow>)> = Vec::new();
    for row in rows {
        let key = (row.sweep_value.to_bits(), row.method, row.direction);
        match groups.iter_mut().find(|(k, _)| *k == key) {
            Some((_, members)) => members.push(row),
            None => groups.push((key, vec![row])),
        }
    }
    groups
        .into_iter()
        .map(|((value, method, direction), members)| {
            let nats: Vec<f64> = members.iter().map(|r| r.di_nats).collect();
            let bits: Vec<f64> = members.iter().map(|r| r.di_bits).collect();
            let flags: Vec<bool> = members.iter().filter_map(|r| r.significant).collect();
            let significant_fraction = (flags.len() == members.len())
                .then(|| flags.iter().filter(|&&s| s).count() as f64 / flags.len() as f64);
            SummaryRow {
                sweep_value: f64::from_bits(value),
                method,
                direction,
                trials: members.len(),
                mean_nats: mean(&nats),
                std_nats: sample_std(&nats),
                mean_bits: mean(&bits),
                std_bits: sample_std(&bits),
                significant_fraction,
                mean_m_used: members.iter().map(|r| r.m_used as f64).sum::<f64>() / members.len() as f64,
            }
        })
        .collect()
}

pub fn write_summary(path: &Path, summary: &[SummaryRow]) -> Result<()> {
    let csv_error = |e: csv::Error| CliError::io(path, e.into());
    let mut writer = csv::Writer::from_path(path).map_err(csv_error)?;
    writer.write_record(SUMMARY_COLUMNS).map_err(csv_error)?;
    for s in summary {
        writer
            .write_record([
                s.sweep_value.to_string(),
                s.method.to_string(),
                s.direction.to_string(),
                s.trials.to_string(),
                s.mean_nats.to_string(),
                s.std_nats.to_string(),
                s.mean_bits.to_string(),
                s.std_bits.to_string(),
                s.significant_fraction.map(|f| f.to_string()).unwrap_or_default(),
                s.mean_m_used.to_string(),
            ])
            .map_err(csv_error)?;
    }
    writer.flush().map_err(|e| CliError::io(path, e))
}

/// Parses a results file written by an experiment run.
pub fn read_results(path: &Path) -> Result<Vec<ResultRow>> {
    let name = path.display().to_string();
    let mut reader = csv::Reader::from_path(path).map_err(|e| CliError::io(path, e.into()))?;
    let header = reader.headers().map_err(|e| CliError::io(path, e.into()))?.clone();
    if header.iter().ne(RESULT_COLUMNS) {
        return Err(CliError::Format { path: name, line: 1, message: "unexpected results header".into() });
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| CliError::io(path, e.into()))?;
        let line = record.position().map_or(0, |p| p.line());
        let bad = |what: &str| CliError::Format { path: name.clone(), line, message: format!("bad {what}") };
        let num = |i: usize| record[i].parse::<f64>().map_err(|_| bad(RESULT_COLUMNS[i]));
        let opt = |i: usize| (!record[i].is_empty()).then(|| num(i)).transpose();
        let label = |i: usize| serde_json::Value::String(record[i].to_string());
        rows.push(ResultRow {
            sweep_value: num(0)?,
            trial: record[1].parse().map_err(|_| bad("trial"))?,
            method: serde_json::from_value(label(2)).map_err(|_| bad("method"))?,
            direction: serde_json::from_value(label(3)).map_err(|_| bad("direction"))?,
            di_nats: num(4)?,
            di_bits: num(5)?,
            m_used: record[6].parse().map_err(|_| bad("m_used"))?,
            p_value: opt(7)?,
            significant: (!record[8].is_empty())
                .then(|| record[8].parse::<bool>().map_err(|_| bad("significant")))
                .transpose()?,
            runtime_ms: opt(9)?,
        });
    }
    Ok(rows)
}
