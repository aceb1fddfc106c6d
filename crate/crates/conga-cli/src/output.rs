//! CSV and JSON writers.
//!
//! Every file starts with two `#` lines naming the library version and the
//! configuration hash. CSV bodies carry a header row; floats are written
//! with 17 significant digits.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
    Empty,
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Float(v) => format_float(*v),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Float)
    }
}

/// 17 significant digits in scientific notation; enough to round-trip.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    /// File stem.
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self { name: name.to_string(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width of table {}", self.name);
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }
}

/// The two provenance lines at the top of every output file.
pub fn banner(config_hash: &str) -> String {
    format!("# conga {} (conga-cli {})\n# config {config_hash}\n", conga::VERSION, env!("CARGO_PKG_VERSION"))
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    let f = File::create(path).map_err(|source| CliError::Write { path: path.to_path_buf(), source })?;
    Ok(BufWriter::new(f))
}

fn write_err(path: &Path) -> impl Fn(std::io::Error) -> CliError + '_ {
    move |source| CliError::Write { path: path.to_path_buf(), source }
}

pub fn write_table(dir: &Path, table: &Table, config_hash: &str) -> Result<PathBuf, CliError> {
    let path = dir.join(format!("{}.csv", table.name));
    let mut w = create(&path)?;
    w.write_all(banner(config_hash).as_bytes()).map_err(write_err(&path))?;
    let mut csv = csv::Writer::from_writer(w);
    let csv_err = |e: csv::Error| CliError::Write { path: path.clone(), source: e.into() };
    csv.write_record(&table.columns).map_err(csv_err)?;
    for row in &table.rows {
        csv.write_record(row.iter().map(Cell::render)).map_err(csv_err)?;
    }
    csv.flush().map_err(write_err(&path))?;
    Ok(path)
}

pub fn write_json(path: &Path, value: &serde_json::Value, config_hash: &str) -> Result<(), CliError> {
    let mut w = create(path)?;
    // JSON has no comments; the banner lives in a field instead.
    let mut v = value.clone();
    if let Some(obj) = v.as_object_mut() {
        obj.insert("version".into(), format!("conga {} (conga-cli {})", conga::VERSION, env!("CARGO_PKG_VERSION")).into());
        obj.insert("config_hash".into(), config_hash.into());
    }
    serde_json::to_writer_pretty(&mut w, &v).map_err(|e| CliError::Write { path: path.to_path_buf(), source: e.into() })?;
    w.write_all(b"\n").map_err(write_err(path))?;
    w.flush().map_err(write_err(path))
}

/// A sparse matrix in coordinate format, preceded by the banner.
pub fn write_matrix(dir: &Path, name: &str, m: &conga::linalg::SparseMatrix, config_hash: &str) -> Result<(), CliError> {
    let path = dir.join(format!("{name}.coo"));
    let mut w = create(&path)?;
    w.write_all(banner(config_hash).as_bytes()).map_err(write_err(&path))?;
    m.write_coo(&mut w).map_err(write_err(&path))?;
    w.flush().map_err(write_err(&path))
}
