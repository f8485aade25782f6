//! CSV persistence for densities, trajectories and reports.
//!
//! Floats are written in shortest round-trip form, so reading a file back
//! gives bit-identical values.

use std::fs;
use std::path::{Path, PathBuf};

use crate::chain::ReportRow;
use crate::density::{Density, Grid};
use crate::error::{Error, Result};
use crate::mixing::MixingReport;
use crate::quantum::BoundCheck;
use crate::trajectory::{Snapshot, Source, Trajectory};

const CENTER_TOL: f64 = 1e-12;

pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

/// Time as it appears in a snapshot file name.
pub fn fmt_time(t: f64) -> String {
    format!("{t}")
}

fn malformed(path: &Path, reason: impl Into<String>) -> Error {
    Error::MalformedCsv {
        path: path.to_path_buf(),
        reason: reason.into(),
    }
}

fn writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    Ok(csv::Writer::from_path(path)?)
}

pub fn write_density(path: &Path, d: &Density) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["x", "value"])?;
    for (x, v) in d.grid().centers().zip(d.values()) {
        w.write_record([fmt_f64(x), fmt_f64(*v)])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a two-column density file. The grid is inferred from the row count
/// and the cell centers must match it.
pub fn read_density(path: &Path) -> Result<Density> {
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?;
    let mut xs = Vec::new();
    let mut values = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec?;
        if rec.len() != 2 {
            return Err(malformed(path, format!("row {}: expected 2 columns, got {}", line + 1, rec.len())));
        }
        let parse = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| malformed(path, format!("row {}: not a number: `{s}`", line + 1)))
        };
        xs.push(parse(&rec[0])?);
        values.push(parse(&rec[1])?);
    }
    let grid = Grid::new(values.len()).map_err(|_| malformed(path, format!("{} rows, need at least 2", values.len())))?;
    for (i, (x, c)) in xs.iter().zip(grid.centers()).enumerate() {
        if (x - c).abs() > CENTER_TOL * c.abs().max(1.0) {
            return Err(malformed(path, format!("row {}: x = {x} is not the cell center {c}", i + 1)));
        }
    }
    Density::new(grid, values).map_err(|e| malformed(path, e.to_string()))
}

pub fn snapshot_path(dir: &Path, t: f64) -> PathBuf {
    dir.join(format!("t_{}.csv", fmt_time(t)))
}

pub fn save_trajectory(traj: &Trajectory, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    traj.snapshots()
        .iter()
        .map(|s| {
            let p = snapshot_path(dir, s.t);
            write_density(&p, &s.density)?;
            Ok(p)
        })
        .collect()
}

fn parse_snapshot_time(path: &Path) -> Option<f64> {
    let stem = path.file_stem()?.to_str()?;
    stem.strip_prefix("t_")?.parse().ok()
}

/// Loads `t_<time>.csv` files from a directory, or the files matching a glob
/// pattern. Snapshots are ordered by parsed time, not by file name.
pub fn load_trajectory(input: &str) -> Result<Trajectory> {
    let as_path = Path::new(input);
    let pattern = if as_path.is_dir() {
        as_path.join("t_*.csv").to_string_lossy().into_owned()
    } else {
        input.to_string()
    };
    let paths = glob::glob(&pattern).map_err(|e| Error::InvalidParameter(format!("bad pattern `{pattern}`: {e}")))?;
    let mut snaps = Vec::new();
    for p in paths {
        let p = p.map_err(|e| Error::Io(e.into()))?;
        if !p.is_file() {
            continue;
        }
        let t = parse_snapshot_time(&p).ok_or_else(|| malformed(&p, "file name is not t_<time>.csv"))?;
        snaps.push(Snapshot {
            t,
            density: read_density(&p)?,
        });
    }
    if snaps.is_empty() {
        return Err(Error::NoSnapshots(pattern));
    }
    snaps.sort_by(|a, b| a.t.total_cmp(&b.t));
    Trajectory::new(snaps, Source::File)
}

/// One row of `lambda.csv`. `lambda_prime_rhs` is empty when not available.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaRow {
    pub t: f64,
    pub phi_id: String,
    pub lambda: f64,
    pub lambda_prime_rhs: Option<f64>,
}

pub fn write_lambda_csv(path: &Path, rows: &[LambdaRow]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["t", "phi_id", "lambda", "lambda_prime_rhs"])?;
    for r in rows {
        w.write_record([
            fmt_f64(r.t),
            r.phi_id.clone(),
            fmt_f64(r.lambda),
            r.lambda_prime_rhs.map(fmt_f64).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// `bound.csv`: the norm-corrected bound in `rhs`/`holds` and the bound
/// without the norm factor in `rhs_bare`/`holds_bare`.
pub fn write_bound_csv(path: &Path, rows: &[(f64, String, BoundCheck)]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["t", "phi_id", "lhs", "rhs", "holds", "rhs_bare", "holds_bare"])?;
    for (t, id, b) in rows {
        w.write_record([
            fmt_f64(*t),
            id.clone(),
            fmt_f64(b.lhs),
            fmt_f64(b.rhs),
            b.holds.to_string(),
            fmt_f64(b.rhs_bare),
            b.holds_bare.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_report_csv(path: &Path, rows: &[ReportRow]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["check", "t1", "t2", "phi_id", "value", "pass"])?;
    for r in rows {
        w.write_record([
            r.check.as_str().to_string(),
            fmt_f64(r.t1),
            fmt_f64(r.t2),
            r.phi_id.clone(),
            fmt_f64(r.value),
            r.pass.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_correlations_csv(path: &Path, report: &MixingReport) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["n", "pair_id", "value", "limit", "abs_err"])?;
    for pair in &report.pairs {
        for (n, &value) in pair.correlations.iter().enumerate() {
            w.write_record([
                n.to_string(),
                pair.pair_id.clone(),
                fmt_f64(value),
                fmt_f64(pair.limit),
                fmt_f64((value - pair.limit).abs()),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}
