use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::grid::{TableKind, Tabulated};
use crate::inversion::config::Scheme;
use crate::io::{read_table, write_table};

pub const HISTORY_FILE: &str = "history.csv";
pub const BEST_FILE: &str = "best.txt";
pub const TARGET_FILE: &str = "target_rdf.dat";

#[derive(Debug, Clone)]
pub struct IterationRecord {
    pub k: usize,
    pub potential: Tabulated,
    pub rdf: Tabulated,
    pub data_fit: f64,
    pub epsilon: Option<f64>,
    pub pressure: f64,
    /// Residual of the pressure constraint for the step taken from this iterate.
    pub constraint_residual: Option<f64>,
}

#[derive(Debug)]
pub struct IterationFailure {
    pub k: usize,
    pub error: Error,
}

#[derive(Debug)]
pub struct IterationHistory {
    pub scheme: Scheme,
    pub records: Vec<IterationRecord>,
    pub failure: Option<IterationFailure>,
}

impl IterationHistory {
    pub fn new(scheme: Scheme) -> Self {
        Self { scheme, records: Vec::new(), failure: None }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn last(&self) -> Option<&IterationRecord> {
        self.records.last()
    }

    /// Iterate with the smallest data fit (first one on ties).
    pub fn best(&self) -> Option<&IterationRecord> {
        self.records.iter().fold(None, |best: Option<&IterationRecord>, r| match best {
            Some(b) if b.data_fit <= r.data_fit => Some(b),
            _ => Some(r),
        })
    }

    /// First iteration whose `epsilon / epsilon_0` drops below `ratio`.
    pub fn first_epsilon_below(&self, ratio: f64) -> Option<usize> {
        let e0 = self.records.first()?.epsilon?;
        self.records
            .iter()
            .find(|r| r.epsilon.is_some_and(|e| e / e0 < ratio))
            .map(|r| r.k)
    }

    pub fn summary_rows(&self) -> Vec<HistoryRow> {
        self.records
            .iter()
            .map(|r| HistoryRow {
                k: r.k,
                data_fit: r.data_fit,
                epsilon: r.epsilon,
                pressure: r.pressure,
                constraint_residual: r.constraint_residual,
            })
            .collect()
    }

    /// Write `history.csv`, `u_###.dat`, `g_###.dat`, the target RDF and the best-iterate marker.
    pub fn write_run_dir(&self, dir: &Path, target: &Tabulated) -> Result<()> {
        fs::create_dir_all(dir)?;
        write_history_csv(&dir.join(HISTORY_FILE), &self.summary_rows())?;
        for r in &self.records {
            write_table(&potential_path(dir, r.k), &r.potential, &format!("u_{} r u", r.k))?;
            write_table(&rdf_path(dir, r.k), &r.rdf, &format!("g_{} r g", r.k))?;
        }
        write_table(&dir.join(TARGET_FILE), target, "target r g")?;
        let mut marker = String::new();
        if let Some(b) = self.best() {
            marker.push_str(&format!("best {}\n", b.k));
        }
        if let Some(f) = &self.failure {
            marker.push_str(&format!("failed {} {}\n", f.k, f.error));
        }
        fs::write(dir.join(BEST_FILE), marker)?;
        Ok(())
    }
}

/// One line of `history.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct HistoryRow {
    pub k: usize,
    pub data_fit: f64,
    pub epsilon: Option<f64>,
    pub pressure: f64,
    pub constraint_residual: Option<f64>,
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:e}")).unwrap_or_default()
}

pub fn write_history_csv(path: &Path, rows: &[HistoryRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["k", "data_fit", "epsilon", "pressure", "constraint_residual"])?;
    for r in rows {
        w.write_record([
            r.k.to_string(),
            format!("{:e}", r.data_fit),
            opt(r.epsilon),
            format!("{:e}", r.pressure),
            opt(r.constraint_residual),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_history_csv(path: &Path) -> Result<Vec<HistoryRow>> {
    let mut rd = csv::Reader::from_path(path)?;
    let mut rows = Vec::new();
    for (idx, rec) in rd.records().enumerate() {
        let rec = rec?;
        let line = idx + 2;
        let field = |i: usize| -> Result<Option<f64>> {
            let s = rec.get(i).unwrap_or("").trim();
            if s.is_empty() {
                return Ok(None);
            }
            s.parse::<f64>()
                .map(Some)
                .map_err(|_| Error::Parse { line, message: format!("invalid number {s:?}") })
        };
        let k = rec
            .get(0)
            .and_then(|s| s.trim().parse::<usize>().ok())
            .ok_or_else(|| Error::Parse { line, message: "invalid iteration index".into() })?;
        let need = |v: Option<f64>, name: &str| {
            v.ok_or_else(|| Error::Parse { line, message: format!("missing {name}") })
        };
        rows.push(HistoryRow {
            k,
            data_fit: need(field(1)?, "data_fit")?,
            epsilon: field(2)?,
            pressure: need(field(3)?, "pressure")?,
            constraint_residual: field(4)?,
        });
    }
    Ok(rows)
}

pub fn potential_path(dir: &Path, k: usize) -> PathBuf {
    dir.join(format!("u_{k:03}.dat"))
}

pub fn rdf_path(dir: &Path, k: usize) -> PathBuf {
    dir.join(format!("g_{k:03}.dat"))
}

/// History rows and potentials stored in a run directory.
pub struct RunDirectory {
    pub rows: Vec<HistoryRow>,
    pub potentials: Vec<Tabulated>,
    pub target: Option<Tabulated>,
}

pub fn load_run_dir(dir: &Path) -> Result<RunDirectory> {
    let csv_path = dir.join(HISTORY_FILE);
    if !csv_path.is_file() {
        return Err(Error::NoRuns(dir.to_path_buf()));
    }
    let rows = read_history_csv(&csv_path)?;
    if rows.is_empty() {
        return Err(Error::NoRuns(dir.to_path_buf()));
    }
    let potentials = rows
        .iter()
        .map(|r| read_table(&potential_path(dir, r.k), TableKind::Potential))
        .collect::<Result<Vec<_>>>()?;
    let target_path = dir.join(TARGET_FILE);
    let target = if target_path.is_file() {
        Some(read_table(&target_path, TableKind::Rdf)?)
    } else {
        None
    };
    Ok(RunDirectory { rows, potentials, target })
}
