//! File formats: graph descriptions, JSON reports and CSV tables.
//!
//! Everything here works in `f64`. Floats in JSON are written in the
//! shortest form that parses back to the same bits; CSV cells use
//! `{:.16e}` (17 significant digits).

mod export;
mod graph_file;
mod tables;

pub use export::{geometry_report, growth_report, synthesis_report, weyl_report, GeometryReport, SpectralExport};
pub use graph_file::{graph_to_json, parse_graph_file, parse_graph_str};
pub use tables::{
    parse_control_csv, parse_trajectory_csv, read_control_csv, trajectory_csv, write_control_csv, TrajectoryTable,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: line {line}, column {column}: {message}")]
    Parse { path: String, line: usize, column: usize, message: String },
    #[error("{path}: {context}: {message}")]
    Schema { path: String, context: String, message: String },
    #[error("{path}: {message}")]
    Read { path: String, message: String },
    #[error("table: {0}")]
    Table(String),
}

pub(crate) fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}
