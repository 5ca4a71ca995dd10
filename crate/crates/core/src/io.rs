//! Two-column text tables: `r value` per line, `#` starts a comment line.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::{RadialGrid, TableKind, Tabulated};

/// Parse whitespace-separated `(x, y)` pairs; abscissae must increase strictly.
pub fn parse_columns(text: &str) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        if fields.len() != 2 {
            return Err(Error::Parse {
                line,
                message: format!("expected 2 columns, found {} in {trimmed:?}", fields.len()),
            });
        }
        let parse = |s: &str| -> Result<f64> {
            s.parse::<f64>().map_err(|_| Error::Parse {
                line,
                message: format!("cannot parse {s:?} as a number"),
            })
        };
        let x = parse(fields[0])?;
        let y = parse(fields[1])?;
        if let Some(&prev) = xs.last() {
            if !(x > prev) {
                return Err(Error::Parse {
                    line,
                    message: format!("abscissa {x} does not increase (previous {prev})"),
                });
            }
        }
        xs.push(x);
        ys.push(y);
    }
    if xs.is_empty() {
        return Err(Error::Parse { line: 0, message: "table contains no data".into() });
    }
    Ok((xs, ys))
}

/// Recover the equidistant grid `r_j = j*dr` from tabulated radii.
pub fn infer_grid(radii: &[f64]) -> Result<RadialGrid> {
    let dr = radii[0];
    for (j, &r) in radii.iter().enumerate() {
        let expected = (j + 1) as f64 * dr;
        if (r - expected).abs() > 1e-9 * expected.max(1.0) {
            return Err(Error::Parse {
                line: 0,
                message: format!("radius {r} breaks the grid r_j = j*{dr} (expected {expected})"),
            });
        }
    }
    RadialGrid::new(dr, radii.len(), radii.len())
}

/// Parse a table; potentials get `n = m` = number of rows.
pub fn parse_table(text: &str, kind: TableKind) -> Result<Tabulated> {
    let (r, v) = parse_columns(text)?;
    let grid = infer_grid(&r)?;
    Tabulated::new(grid, v, kind)
}

pub fn read_table(path: &Path, kind: TableKind) -> Result<Tabulated> {
    parse_table(&fs::read_to_string(path)?, kind)
}

pub fn format_columns(xs: &[f64], ys: &[f64], header: &str) -> String {
    let mut out = String::new();
    for line in header.lines() {
        let _ = writeln!(out, "# {line}");
    }
    for (x, y) in xs.iter().zip(ys) {
        let _ = writeln!(out, "{x:e} {y:e}");
    }
    out
}

pub fn write_columns(path: &Path, xs: &[f64], ys: &[f64], header: &str) -> Result<()> {
    fs::write(path, format_columns(xs, ys, header))?;
    Ok(())
}

pub fn format_table(table: &Tabulated, header: &str) -> String {
    format_columns(&table.radii(), table.values(), header)
}

pub fn write_table(path: &Path, table: &Tabulated, header: &str) -> Result<()> {
    fs::write(path, format_table(table, header))?;
    Ok(())
}
