//! CSV output and run manifests.
//!
//! Result tables are comma-separated with a header row and LF line endings.
//! Floats are written in Rust's shortest round-trip form, so parsing a table
//! back recovers every estimate exactly. Estimate columns:
//!
//! `outage_mean, outage_ci_lo, outage_ci_hi, ee_mean, ee_ci_lo, ee_ci_hi, n_trials, n_failed`
//!
//! preceded by the key columns of the table (e.g. `param_value`, or
//! `association, param_value` for a comparison).

use std::collections::BTreeMap;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::montecarlo::{Estimates, MetricEstimate, MetricId};
use crate::params::SimParams;
use crate::sweep::SweepResult;

pub const ESTIMATE_COLUMNS: [&str; 8] = [
    "outage_mean",
    "outage_ci_lo",
    "outage_ci_hi",
    "ee_mean",
    "ee_ci_lo",
    "ee_ci_hi",
    "n_trials",
    "n_failed",
];

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table {
            header: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    /// Table whose key columns precede the estimate columns.
    pub fn for_estimates(keys: &[&str]) -> Self {
        let mut cols = keys.to_vec();
        cols.extend(ESTIMATE_COLUMNS);
        Table::new(&cols)
    }

    pub fn push_estimates(&mut self, keys: Vec<String>, e: &Estimates) {
        let mut row = keys;
        row.extend([
            e.outage.mean.to_string(),
            e.outage.ci_lo.to_string(),
            e.outage.ci_hi.to_string(),
            e.ee.mean.to_string(),
            e.ee.ci_lo.to_string(),
            e.ee.ci_hi.to_string(),
            e.outage.n_trials.to_string(),
            e.n_failed.to_string(),
        ]);
        self.rows.push(row);
    }

    pub fn push_sweep(&mut self, label: Option<&str>, sweep: &SweepResult) {
        for p in &sweep.points {
            let mut keys: Vec<String> = label.map(|l| vec![l.to_string()]).unwrap_or_default();
            keys.push(p.value.to_string());
            self.push_estimates(keys, &p.estimates);
        }
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv")
    }

    pub fn from_csv(text: &str) -> Result<Self, csv::Error> {
        let mut r = csv::ReaderBuilder::new().from_reader(text.as_bytes());
        let header = r.headers()?.iter().map(str::to_string).collect();
        let rows = r
            .records()
            .map(|rec| rec.map(|rec| rec.iter().map(str::to_string).collect()))
            .collect::<Result<_, _>>()?;
        Ok(Table { header, rows })
    }
}

/// A row read back from a result table.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateRow {
    /// Non-estimate columns, by name.
    pub keys: BTreeMap<String, String>,
    pub estimates: Estimates,
}

#[derive(Debug, thiserror::Error)]
pub enum ReadError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("missing column `{0}`")]
    MissingColumn(&'static str),
    #[error("row {row}, column `{column}`: cannot parse `{value}`")]
    Parse { row: usize, column: String, value: String },
}

/// Parses a result table written by [`Table::to_csv`].
pub fn read_estimates(text: &str) -> Result<Vec<EstimateRow>, ReadError> {
    let table = Table::from_csv(text)?;
    let mut idx = [0usize; 8];
    for (slot, col) in idx.iter_mut().zip(ESTIMATE_COLUMNS) {
        *slot = table
            .header
            .iter()
            .position(|h| h == col)
            .ok_or(ReadError::MissingColumn(col))?;
    }
    table
        .rows
        .iter()
        .enumerate()
        .map(|(r, row)| {
            let f = |i: usize| -> Result<f64, ReadError> {
                row[idx[i]].parse().map_err(|_| ReadError::Parse {
                    row: r + 1,
                    column: ESTIMATE_COLUMNS[i].to_string(),
                    value: row[idx[i]].clone(),
                })
            };
            let u = |i: usize| -> Result<u64, ReadError> {
                row[idx[i]].parse().map_err(|_| ReadError::Parse {
                    row: r + 1,
                    column: ESTIMATE_COLUMNS[i].to_string(),
                    value: row[idx[i]].clone(),
                })
            };
            let n = u(6)?;
            let metric = |id, mean, lo, hi| MetricEstimate {
                metric_id: id,
                mean,
                ci_lo: lo,
                ci_hi: hi,
                ci_halfwidth: 0.5 * (hi - lo),
                n_trials: n,
            };
            let keys = table
                .header
                .iter()
                .zip(row)
                .enumerate()
                .filter(|(i, _)| !idx.contains(i))
                .map(|(_, (h, v))| (h.clone(), v.clone()))
                .collect();
            Ok(EstimateRow {
                keys,
                estimates: Estimates {
                    outage: metric(MetricId::Outage, f(0)?, f(1)?, f(2)?),
                    ee: metric(MetricId::Ee, f(3)?, f(4)?, f(5)?),
                    n_failed: u(7)?,
                },
            })
        })
        .collect()
}

/// Everything needed to reproduce a result file, written next to it as
/// `<out>.manifest.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest<S> {
    pub tool: String,
    pub version: String,
    /// UTC, RFC 3339. Informational only; not part of the CSV.
    pub timestamp: String,
    pub seed: u64,
    pub run: S,
    pub params: SimParams,
    pub presets: Vec<String>,
    /// Successful trials per estimate, in table row order.
    pub trials_per_row: Vec<u64>,
    pub n_failed: u64,
    pub output: PathBuf,
}

pub fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".manifest.json");
    out.with_file_name(name)
}

/// Writes `contents` to `path` through a temporary sibling so a failed run
/// never leaves a partial file behind.
pub fn write_atomic(path: &Path, contents: &str) -> io::Result<()> {
    let mut tmp_name = path.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    tmp_name.push(".partial");
    let tmp = path.with_file_name(tmp_name);
    if let Err(e) = std::fs::write(&tmp, contents).and_then(|_| std::fs::rename(&tmp, path)) {
        let _ = std::fs::remove_file(&tmp);
        return Err(e);
    }
    Ok(())
}
