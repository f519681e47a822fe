//! Tabular output in CSV, JSON or key-value form.
//!
//! Floats are written with 17 significant digits so that every value
//! round-trips exactly; non-finite values become `NaN`/`inf` in CSV and
//! `null` in JSON.

use std::fmt::Write as _;

use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    /// One `key=value` line per field, records separated by a blank line.
    Kv,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
            Format::Kv => "txt",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    F(f64),
    I(i64),
    U(u64),
    B(bool),
    S(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::F(v)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::U(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::U(v as u64)
    }
}

impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Cell::U(u64::from(v))
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::I(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::B(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::S(v.to_owned())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::S(v)
    }
}

pub fn fmt_float(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:.16e}")
    }
}

impl Cell {
    fn text(&self) -> String {
        match self {
            Cell::F(v) => fmt_float(*v),
            Cell::I(v) => v.to_string(),
            Cell::U(v) => v.to_string(),
            Cell::B(v) => v.to_string(),
            Cell::S(s) => s.clone(),
        }
    }

    fn csv(&self) -> String {
        match self {
            Cell::S(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
            other => other.text(),
        }
    }

    fn json(&self) -> String {
        match self {
            Cell::F(v) if !v.is_finite() => "null".into(),
            Cell::S(s) => serde_json::to_string(s).expect("strings always serialise"),
            other => other.text(),
        }
    }
}

/// A table plus the provenance needed for the metadata trailer.
#[derive(Debug, Clone)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self { columns: columns.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width must match the header");
        self.rows.push(row);
    }
}

/// Run metadata written after the records.
#[derive(Debug, Clone)]
pub struct Meta {
    pub config_hash: String,
    pub tolerances: String,
}

impl Meta {
    pub fn new<C: Serialize>(config: &C, tolerances: impl Into<String>) -> Self {
        let canonical = serde_json::to_string(config).expect("configs serialise");
        let digest = Sha256::digest(canonical.as_bytes());
        let config_hash = digest.iter().fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        });
        Self { config_hash, tolerances: tolerances.into() }
    }

    fn line(&self) -> String {
        format!(
            "# erline {} config_hash={} tolerances={}",
            env!("CARGO_PKG_VERSION"),
            self.config_hash,
            self.tolerances
        )
    }
}

pub fn render(table: &Table, meta: &Meta, format: Format) -> String {
    let mut out = String::new();
    match format {
        Format::Csv => {
            out.push_str(&table.columns.join(","));
            out.push('\n');
            for row in &table.rows {
                let cells: Vec<String> = row.iter().map(Cell::csv).collect();
                out.push_str(&cells.join(","));
                out.push('\n');
            }
            out.push_str(&meta.line());
            out.push('\n');
        }
        Format::Json => {
            // Metadata has no place in a bare array, so JSON carries records only.
            out.push('[');
            for (k, row) in table.rows.iter().enumerate() {
                out.push_str(if k == 0 { "\n  {" } else { ",\n  {" });
                for (j, (col, cell)) in table.columns.iter().zip(row).enumerate() {
                    if j > 0 {
                        out.push_str(", ");
                    }
                    let _ = write!(out, "\"{col}\": {}", cell.json());
                }
                out.push('}');
            }
            out.push_str(if table.rows.is_empty() { "]\n" } else { "\n]\n" });
        }
        Format::Kv => {
            for (k, row) in table.rows.iter().enumerate() {
                if k > 0 {
                    out.push('\n');
                }
                for (col, cell) in table.columns.iter().zip(row) {
                    let _ = writeln!(out, "{col}={}", cell.text());
                }
            }
            out.push_str(&meta.line());
            out.push('\n');
        }
    }
    out
}
