//! Experiment reports and their on-disk form: one CSV per table plus a
//! `report.json` manifest, inside a directory named after the experiment and
//! a hash of its parameters. Output bytes depend only on the report.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
}

impl Cell {
    pub fn to_json(&self) -> Value {
        match self {
            Cell::Int(i) => json!(i),
            // non-finite floats have no JSON form
            Cell::Float(f) if f.is_finite() => json!(f),
            Cell::Float(f) => json!(f.to_string()),
            Cell::Text(s) => json!(s),
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Int(i) => Some(*i as f64),
            Cell::Float(f) => Some(*f),
            Cell::Text(_) => None,
        }
    }
}

/// Floats print with 17 significant digits.
impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Int(i) => write!(f, "{i}"),
            Cell::Float(x) => write!(f, "{x:.16e}"),
            Cell::Text(s) => f.write_str(s),
        }
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Table { name: name.to_string(), header: header.iter().map(|h| h.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len(), "row width for table {}", self.name);
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let path = PathBuf::from(format!("{}.csv", self.name));
        let csv_err = |source| Error::Csv { path: path.clone(), source };
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(&self.header).map_err(csv_err)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|c| c.to_string())).map_err(csv_err)?;
        }
        w.into_inner().map_err(|e| Error::Io { path: path.clone(), source: e.into_error() })
    }
}

/// Outcome of one named acceptance check. `margin` is positive when the
/// check passes with room to spare.
#[derive(Clone, Debug, PartialEq)]
pub struct Verdict {
    pub check: String,
    pub passed: bool,
    pub margin: f64,
}

impl Verdict {
    pub fn new(check: &str, passed: bool, margin: f64) -> Self {
        Verdict { check: check.to_string(), passed, margin }
    }

    /// Passes iff `margin > 0`.
    pub fn positive(check: &str, margin: f64) -> Self {
        Verdict::new(check, margin > 0.0, margin)
    }

    /// Passes iff `margin >= 0`.
    pub fn non_negative(check: &str, margin: f64) -> Self {
        Verdict::new(check, margin >= 0.0, margin)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentReport {
    pub name: String,
    pub parameters: BTreeMap<String, Cell>,
    pub tables: Vec<Table>,
    pub verdicts: Vec<Verdict>,
}

impl ExperimentReport {
    pub fn new(name: &str) -> Self {
        ExperimentReport { name: name.to_string(), parameters: BTreeMap::new(), tables: Vec::new(), verdicts: Vec::new() }
    }

    pub fn param(&mut self, key: &str, value: impl Into<Cell>) {
        self.parameters.insert(key.to_string(), value.into());
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn verdict(&self, check: &str) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| v.check == check)
    }

    pub fn all_passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.passed)
    }

    pub fn parameters_json(&self) -> Value {
        Value::Object(self.parameters.iter().map(|(k, v)| (k.clone(), v.to_json())).collect())
    }

    /// First 12 hex digits of the SHA-256 of name and parameters.
    pub fn content_hash(&self) -> String {
        let canonical = json!({ "name": self.name, "parameters": self.parameters_json() }).to_string();
        let digest = Sha256::digest(canonical.as_bytes());
        digest.iter().take(6).map(|b| format!("{b:02x}")).collect()
    }

    pub fn run_dir_name(&self) -> String {
        format!("{}-{}", self.name, self.content_hash())
    }

    pub fn to_json(&self) -> Value {
        let tables: Vec<Value> = self
            .tables
            .iter()
            .map(|t| json!({ "name": t.name, "file": format!("{}.csv", t.name), "columns": t.header, "rows": t.rows.len() }))
            .collect();
        let verdicts: Vec<Value> = self
            .verdicts
            .iter()
            .map(|v| json!({ "check": v.check, "passed": v.passed, "margin": Cell::Float(v.margin).to_json() }))
            .collect();
        json!({
            "name": self.name,
            "content_hash": self.content_hash(),
            "parameters": self.parameters_json(),
            "tables": tables,
            "verdicts": verdicts,
            "all_passed": self.all_passed(),
        })
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

/// Writes `report.json` and one CSV per table into `out_dir/<name>-<hash>`,
/// returning that directory.
pub fn emit_outputs(report: &ExperimentReport, out_dir: &Path) -> Result<PathBuf> {
    let dir = out_dir.join(report.run_dir_name());
    fs::create_dir_all(&dir).map_err(|source| Error::Io { path: dir.clone(), source })?;
    for t in &report.tables {
        write_file(&dir.join(format!("{}.csv", t.name)), &t.to_csv()?)?;
    }
    let mut json = serde_json::to_vec_pretty(&report.to_json())?;
    json.push(b'\n');
    write_file(&dir.join("report.json"), &json)?;
    Ok(dir)
}

/// Writes a single table as `<dir>/<name>.csv`.
pub fn write_table(table: &Table, dir: &Path) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|source| Error::Io { path: dir.to_path_buf(), source })?;
    let path = dir.join(format!("{}.csv", table.name));
    write_file(&path, &table.to_csv()?)?;
    Ok(path)
}
