//! Bit-exact file outputs. Reals carry 17 significant digits, so every
//! `f64` survives a round trip through the text.

use std::fs;
use std::path::{Path, PathBuf};

use crystal_core::grid::format_real;
use crystal_core::NodeField64;

use crate::config::ScenarioConfig;
use crate::HarnessError;

/// One CSV cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Real(f64),
    Int(u64),
    Text(String),
    Empty,
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Real(x) => format_real(*x),
            Cell::Int(n) => n.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Real(x)
    }
}

impl From<usize> for Cell {
    fn from(n: usize) -> Self {
        Cell::Int(n as u64)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Empty, Cell::Real)
    }
}

/// A table with a fixed header; every row has one cell per column.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    header: Vec<&'static str>,
    rows: Vec<Vec<Cell>>,
}

impl CsvTable {
    pub fn new(header: &[&'static str]) -> Self {
        Self { header: header.to_vec(), rows: Vec::new() }
    }

    pub fn header(&self) -> &[&'static str] {
        &self.header
    }

    pub fn rows(&self) -> &[Vec<Cell>] {
        &self.rows
    }

    /// # Panics
    /// If the row length differs from the header; that is a programming
    /// error in the caller.
    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.header.len(), "row arity for columns {:?}", self.header);
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| e.to_string();
        let run = || -> Result<Vec<u8>, String> {
            w.write_record(&self.header).map_err(io)?;
            for row in &self.rows {
                w.write_record(row.iter().map(Cell::render)).map_err(io)?;
            }
            w.into_inner().map_err(|e| e.to_string())
        };
        // writing to memory cannot fail
        String::from_utf8(run().expect("in-memory csv")).expect("utf-8 csv")
    }

    pub fn write(&self, path: &Path) -> Result<(), HarnessError> {
        write_file(path, &self.to_csv())
    }
}

pub fn write_file(path: &Path, text: &str) -> Result<(), HarnessError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|source| HarnessError::Io { path: parent.to_path_buf(), source })?;
    }
    fs::write(path, text).map_err(|source| HarnessError::Io { path: path.to_path_buf(), source })
}

pub fn write_snapshot(path: &Path, field: &NodeField64) -> Result<(), HarnessError> {
    write_file(path, &field.to_snapshot())
}

/// The config echo plus a `[manifest]` section the parser skips.
pub fn manifest_text(config: &ScenarioConfig) -> String {
    format!(
        "{}\n[manifest]\nharness_version = {}\ncore_version = {}\nseed = {}\n",
        config.to_text(),
        env!("CARGO_PKG_VERSION"),
        crystal_core::VERSION,
        config.seed
    )
}

pub fn write_manifest(dir: &Path, config: &ScenarioConfig) -> Result<PathBuf, HarnessError> {
    let path = dir.join("manifest.txt");
    write_file(&path, &manifest_text(config))?;
    Ok(path)
}
