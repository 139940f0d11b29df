//! CSV tables for controls and modal trajectories.

use super::{fmt_f64, IoError};
use crate::control::{BoundaryControl, ControlRepr, Equation, SampledControl};
use crate::evolution::Trajectory;
use crate::scalar::Cplx;
use std::path::Path;

fn table_err(e: impl std::fmt::Display) -> IoError {
    IoError::Table(e.to_string())
}

fn write_rows(header: &[String], rows: impl Iterator<Item = Vec<f64>>) -> Result<String, IoError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(table_err)?;
    for r in rows {
        w.write_record(r.iter().map(|&x| fmt_f64(x))).map_err(table_err)?;
    }
    String::from_utf8(w.into_inner().map_err(table_err)?).map_err(table_err)
}

fn read_rows(text: &str) -> Result<(Vec<String>, Vec<Vec<f64>>), IoError> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> = r.headers().map_err(table_err)?.iter().map(str::to_owned).collect();
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(table_err)?;
        let row = rec
            .iter()
            .map(|c| c.trim().parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| IoError::Table(format!("row {}: {e}", i + 2)))?;
        rows.push(row);
    }
    Ok((header, rows))
}

/// Control samples as CSV: `t` then `g<id>` per channel, or
/// `g<id>_re,g<id>_im` for complex controls. Atom controls are sampled at
/// `count + 1` uniform times.
pub fn write_control_csv(control: &BoundaryControl<f64>, count: usize) -> Result<String, IoError> {
    let sampled;
    let smp = match control.repr() {
        ControlRepr::Sampled(s) => s,
        ControlRepr::Atoms(_) => {
            sampled = control.to_sampled(count);
            match sampled.repr() {
                ControlRepr::Sampled(s) => s,
                ControlRepr::Atoms(_) => unreachable!(),
            }
        }
    };
    let real = control.is_real();
    let mut header = vec!["t".to_string()];
    for id in control.channel_ids() {
        if real {
            header.push(format!("g{id}"));
        } else {
            header.push(format!("g{id}_re"));
            header.push(format!("g{id}_im"));
        }
    }
    let rows = smp.times().into_iter().zip(&smp.values).map(|(t, v)| {
        let mut row = vec![t];
        for z in v {
            row.push(z.re);
            if !real {
                row.push(z.im);
            }
        }
        row
    });
    write_rows(&header, rows)
}

/// Inverse of [`write_control_csv`]; times must be uniform from zero.
pub fn parse_control_csv(text: &str, boundary_ids: &[usize]) -> Result<BoundaryControl<f64>, IoError> {
    let (header, rows) = read_rows(text)?;
    if header.first().map(String::as_str) != Some("t") {
        return Err(IoError::Table("first column must be `t`".into()));
    }
    let cols = &header[1..];
    let real = !cols.iter().any(|c| c.ends_with("_re") || c.ends_with("_im"));
    let mut ids = Vec::new();
    for (i, c) in cols.iter().enumerate() {
        let name = if real {
            c.as_str()
        } else {
            let want = if i % 2 == 0 { "_re" } else { "_im" };
            c.strip_suffix(want).ok_or_else(|| IoError::Table(format!("column `{c}`: expected suffix {want}")))?
        };
        let id: usize = name
            .strip_prefix('g')
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| IoError::Table(format!("column `{c}` is not a channel name")))?;
        if real || i % 2 == 0 {
            ids.push(id);
        }
    }
    if rows.len() < 2 {
        return Err(IoError::Table("need at least two samples".into()));
    }
    let dt = rows[1][0] - rows[0][0];
    for (i, r) in rows.iter().enumerate() {
        if r.len() != header.len() {
            return Err(IoError::Table(format!("row {} has {} cells, expected {}", i + 2, r.len(), header.len())));
        }
        let want = dt * i as f64;
        if rows[0][0] != 0.0 || !(dt > 0.0) || (r[0] - want).abs() > 1e-9 * want.max(dt) {
            return Err(IoError::Table(format!("row {}: times must be uniform and start at 0", i + 2)));
        }
    }
    let values = rows
        .iter()
        .map(|r| {
            if real {
                r[1..].iter().map(|&x| Cplx::new(x, 0.0)).collect()
            } else {
                r[1..].chunks(2).map(|p| Cplx::new(p[0], p[1])).collect()
            }
        })
        .collect();
    let horizon = dt * (rows.len() - 1) as f64;
    BoundaryControl::from_samples(boundary_ids.to_vec(), ids, horizon, real, SampledControl { dt, values }).map_err(table_err)
}

pub fn read_control_csv(path: impl AsRef<Path>, boundary_ids: &[usize]) -> Result<BoundaryControl<f64>, IoError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| IoError::Read { path: path.display().to_string(), message: e.to_string() })?;
    parse_control_csv(&text, boundary_ids)
}

/// A trajectory in table form: `t`, `c_1..c_K` (`c_k_re,c_k_im` for
/// Schrödinger), then `dc_1..dc_K` for the wave equation.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl TrajectoryTable {
    pub fn new(tr: &Trajectory<f64>) -> Self {
        let k = tr.mode_count();
        let complex = tr.equation == Equation::Schrodinger;
        let mut header = vec!["t".to_string()];
        for m in 1..=k {
            if complex {
                header.push(format!("c_{m}_re"));
                header.push(format!("c_{m}_im"));
            } else {
                header.push(format!("c_{m}"));
            }
        }
        if tr.velocities.is_some() {
            header.extend((1..=k).map(|m| format!("dc_{m}")));
        }
        let rows = tr
            .times
            .iter()
            .enumerate()
            .map(|(i, &t)| {
                let mut row = vec![t];
                for z in &tr.values[i] {
                    row.push(z.re);
                    if complex {
                        row.push(z.im);
                    }
                }
                if let Some(v) = &tr.velocities {
                    row.extend(v[i].iter().map(|z| z.re));
                }
                row
            })
            .collect();
        Self { header, rows }
    }

    pub fn to_csv(&self) -> Result<String, IoError> {
        write_rows(&self.header, self.rows.iter().cloned())
    }
}

pub fn trajectory_csv(tr: &Trajectory<f64>) -> Result<String, IoError> {
    TrajectoryTable::new(tr).to_csv()
}

pub fn parse_trajectory_csv(text: &str) -> Result<TrajectoryTable, IoError> {
    let (header, rows) = read_rows(text)?;
    Ok(TrajectoryTable { header, rows })
}
