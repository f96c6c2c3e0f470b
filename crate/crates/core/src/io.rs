//! File formats: trajectory CSV, model / report JSON, Pareto CSV.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use nalgebra::DMatrix;
use serde::{de::DeserializeOwned, Serialize};

use crate::dynamics::{Trajectory, TrajectorySource};
use crate::error::{Error, Result};
use crate::pipeline::ParetoRow;

/// Full-precision float formatting: 17 significant digits round-trips f64.
fn fmt_f64(v: f64) -> String {
    format!("{:.16e}", v)
}

/// Write `t,x1,…,xn[,dx1,…,dxn]`, one row per sample.
pub fn write_trajectory_csv(path: &Path, traj: &Trajectory) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    let n = traj.n_states();
    let mut header = String::from("t");
    for i in 0..n {
        header.push_str(&format!(",x{}", i + 1));
    }
    if traj.derivs.is_some() {
        for i in 0..n {
            header.push_str(&format!(",dx{}", i + 1));
        }
    }
    writeln!(w, "{}", header)?;
    for row in 0..traj.n_samples() {
        let mut line = fmt_f64(traj.times[row]);
        for i in 0..n {
            line.push(',');
            line.push_str(&fmt_f64(traj.states[(row, i)]));
        }
        if let Some(d) = &traj.derivs {
            for i in 0..n {
                line.push(',');
                line.push_str(&fmt_f64(d[(row, i)]));
            }
        }
        writeln!(w, "{}", line)?;
    }
    Ok(())
}

/// Read a trajectory CSV produced by [`write_trajectory_csv`] (derivative
/// columns optional). `source` tags where the derivatives came from.
pub fn read_trajectory_csv(path: &Path, source: TrajectorySource) -> Result<Trajectory> {
    let content = fs::read_to_string(path)?;
    let mut lines = content.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse(format!("{}: empty file", path.display())))?;
    let cols: Vec<&str> = header.split(',').collect();
    if cols.first() != Some(&"t") {
        return Err(Error::Parse(format!(
            "{}: header must start with 't', got '{}'",
            path.display(),
            header
        )));
    }
    let n_state = cols.iter().filter(|c| c.starts_with('x')).count();
    let n_deriv = cols.iter().filter(|c| c.starts_with("dx")).count();
    if n_state == 0 || (n_deriv != 0 && n_deriv != n_state) {
        return Err(Error::Parse(format!(
            "{}: malformed header '{}'",
            path.display(),
            header
        )));
    }
    let expected = 1 + n_state + n_deriv;
    let mut times = Vec::new();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let vals: std::result::Result<Vec<f64>, _> =
            line.split(',').map(|v| v.trim().parse::<f64>()).collect();
        let vals = vals.map_err(|e| {
            Error::Parse(format!("{}:{}: {}", path.display(), lineno + 2, e))
        })?;
        if vals.len() != expected {
            return Err(Error::Parse(format!(
                "{}:{}: expected {} columns, got {}",
                path.display(),
                lineno + 2,
                expected,
                vals.len()
            )));
        }
        times.push(vals[0]);
        rows.push(vals[1..].to_vec());
    }
    let m = rows.len();
    let states = DMatrix::from_fn(m, n_state, |i, j| rows[i][j]);
    let derivs = if n_deriv > 0 {
        Some(DMatrix::from_fn(m, n_state, |i, j| rows[i][n_state + j]))
    } else {
        None
    };
    Trajectory::new(times, states, derivs, source)
}

/// Pretty-printed JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    Ok(())
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let content = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&content)?)
}

/// `lambda,term_count,residual` rows for plotting.
pub fn write_pareto_csv(path: &Path, rows: &[ParetoRow]) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    writeln!(w, "lambda,term_count,residual")?;
    for r in rows {
        writeln!(w, "{},{},{}", fmt_f64(r.lambda), r.term_count, fmt_f64(r.residual))?;
    }
    Ok(())
}

pub fn read_pareto_csv(path: &Path) -> Result<Vec<ParetoRow>> {
    let content = fs::read_to_string(path)?;
    let mut lines = content.lines();
    match lines.next() {
        Some("lambda,term_count,residual") => {}
        other => {
            return Err(Error::Parse(format!(
                "{}: bad Pareto header {:?}",
                path.display(),
                other
            )))
        }
    }
    let mut rows = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 3 {
            return Err(Error::Parse(format!(
                "{}:{}: expected 3 columns",
                path.display(),
                lineno + 2
            )));
        }
        let parse_err =
            |e: String| Error::Parse(format!("{}:{}: {}", path.display(), lineno + 2, e));
        rows.push(ParetoRow {
            lambda: parts[0].parse().map_err(|e: std::num::ParseFloatError| parse_err(e.to_string()))?,
            term_count: parts[1].parse().map_err(|e: std::num::ParseIntError| parse_err(e.to_string()))?,
            residual: parts[2].parse().map_err(|e: std::num::ParseFloatError| parse_err(e.to_string()))?,
        });
    }
    Ok(rows)
}
