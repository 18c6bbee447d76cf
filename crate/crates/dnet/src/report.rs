//! CSV and JSON emission. Floats are written with 17 significant digits.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{HarnessError, HarnessResult};
use crate::sweep::{SweepSummary, TrialRecord};

pub const RECORD_COLUMNS: [&str; 9] = [
    "net",
    "seed",
    "m",
    "empirical_error",
    "bound2",
    "bound3",
    "refined",
    "cover_hash",
    "wall_time_ms",
];

pub const SUMMARY_COLUMNS: [&str; 4] = ["net", "m", "metric", "value"];

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

fn csv_err(e: csv::Error) -> HarnessError {
    HarnessError::Output(e.to_string())
}

/// Writes `bytes` to a sibling temporary file, then renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> HarnessResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, bytes).map_err(|e| HarnessError::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| HarnessError::io(path, e))
}

pub fn records_csv(records: &[TrialRecord]) -> HarnessResult<Vec<u8>> {
    if records.is_empty() {
        return Err(HarnessError::Output("no records".into()));
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(RECORD_COLUMNS).map_err(csv_err)?;
    for r in records {
        w.write_record([
            r.net.to_string(),
            r.seed.to_string(),
            r.m.to_string(),
            fmt_f64(r.empirical_error),
            fmt_opt(r.bound2),
            fmt_opt(r.bound3),
            fmt_f64(r.refined),
            r.cover_hash.clone(),
            fmt_opt(r.wall_time_ms),
        ])
        .map_err(csv_err)?;
    }
    w.into_inner().map_err(|e| HarnessError::Output(e.to_string()))
}

fn field<T: std::str::FromStr>(rec: &csv::StringRecord, i: usize, row: usize) -> HarnessResult<T> {
    rec.get(i)
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| HarnessError::Output(format!("row {row}: bad `{}`", RECORD_COLUMNS[i])))
}

fn opt_field(rec: &csv::StringRecord, i: usize, row: usize) -> HarnessResult<Option<f64>> {
    match rec.get(i) {
        Some("") | None => Ok(None),
        Some(_) => field(rec, i, row).map(Some),
    }
}

pub fn parse_records_csv(bytes: &[u8]) -> HarnessResult<Vec<TrialRecord>> {
    let mut r = csv::Reader::from_reader(bytes);
    let header = r.headers().map_err(csv_err)?.clone();
    if header.iter().ne(RECORD_COLUMNS) {
        return Err(HarnessError::Output("unexpected header".into()));
    }
    r.records()
        .enumerate()
        .map(|(row, rec)| {
            let rec = rec.map_err(csv_err)?;
            Ok(TrialRecord {
                net: field(&rec, 0, row)?,
                seed: field(&rec, 1, row)?,
                m: field(&rec, 2, row)?,
                empirical_error: field(&rec, 3, row)?,
                bound2: opt_field(&rec, 4, row)?,
                bound3: opt_field(&rec, 5, row)?,
                refined: field(&rec, 6, row)?,
                cover_hash: field(&rec, 7, row)?,
                wall_time_ms: opt_field(&rec, 8, row)?,
            })
        })
        .collect()
}

/// Long format: one `(net, m, metric, value)` row per number; flags are 0/1.
pub fn summary_csv(summary: &SweepSummary) -> HarnessResult<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(SUMMARY_COLUMNS).map_err(csv_err)?;
    let flag = |b: bool| if b { 1.0 } else { 0.0 };
    for c in &summary.cells {
        let mut rows: Vec<(&str, Option<f64>)> = vec![
            ("trials", Some(c.trials as f64)),
            ("mean_error", Some(c.mean_error)),
            ("min_error", Some(c.min_error)),
            ("max_error", Some(c.max_error)),
            ("refined", Some(c.refined)),
            ("bound2", c.bound2),
            ("bound3", c.bound3),
            ("certificate", Some(flag(c.certificate))),
            ("min_le_mean", Some(flag(c.min_le_mean))),
        ];
        rows.push(("mean_le_bound2", c.mean_le_bound2.map(flag)));
        rows.push(("mean_le_bound3", c.mean_le_bound3.map(flag)));
        rows.push(("refined_le_bound2", c.refined_le_bound2.map(flag)));
        for (metric, value) in rows {
            if let Some(v) = value {
                w.write_record([c.net.to_string(), c.m.to_string(), metric.to_string(), fmt_f64(v)])
                    .map_err(csv_err)?;
            }
        }
    }
    w.into_inner().map_err(|e| HarnessError::Output(e.to_string()))
}

pub fn to_json_bytes<T: Serialize>(value: &T) -> HarnessResult<Vec<u8>> {
    let mut out = serde_json::to_vec_pretty(value).map_err(|e| HarnessError::Output(e.to_string()))?;
    out.push(b'\n');
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmittedFiles {
    pub records_csv: PathBuf,
    pub summary_json: PathBuf,
    pub summary_csv: PathBuf,
}

pub fn emit_reports(dir: &Path, stem: &str, records: &[TrialRecord], summary: &SweepSummary) -> HarnessResult<EmittedFiles> {
    let files = EmittedFiles {
        records_csv: dir.join(format!("{stem}_trials.csv")),
        summary_json: dir.join(format!("{stem}_summary.json")),
        summary_csv: dir.join(format!("{stem}_summary.csv")),
    };
    write_atomic(&files.records_csv, &records_csv(records)?)?;
    write_atomic(&files.summary_json, &to_json_bytes(summary)?)?;
    write_atomic(&files.summary_csv, &summary_csv(summary)?)?;
    Ok(files)
}
