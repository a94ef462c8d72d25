use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use crate::args::Format;
use crate::error::CliError;

/// Version tag written next to each CSV schema in the manifest.
pub const SCHEMA_VERSION: u32 = 1;

/// A float with 17 significant digits.
pub fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Num(f64),
    Text(String),
    Flag(bool),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Num(v) => num(*v),
            Cell::Text(s) => s.clone(),
            Cell::Flag(b) => b.to_string(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(v) => json!(v),
            Cell::Num(v) if v.is_finite() => json!(v),
            Cell::Num(v) => json!(v.to_string()),
            Cell::Text(s) => json!(s),
            Cell::Flag(b) => json!(b),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Flag(v)
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self {
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<Vec<u8>, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::csv))?;
        }
        w.into_inner().map_err(|e| CliError::Output(e.to_string()))
    }

    pub fn to_json(&self) -> Value {
        let rows = self
            .rows
            .iter()
            .map(|row| {
                let map = self
                    .columns
                    .iter()
                    .zip(row)
                    .map(|(c, v)| (c.to_string(), v.json()))
                    .collect();
                Value::Object(map)
            })
            .collect();
        Value::Array(rows)
    }
}

/// Where tables and summaries go: files under `--out`, or stdout.
pub struct Output {
    dir: Option<PathBuf>,
    format: Format,
    files: Vec<String>,
    schemas: BTreeMap<String, String>,
}

impl Output {
    pub fn new(dir: Option<PathBuf>, format: Format) -> Result<Self, CliError> {
        if let Some(d) = &dir {
            fs::create_dir_all(d)
                .map_err(|e| CliError::Output(format!("{}: {e}", d.display())))?;
        }
        Ok(Self {
            dir,
            format,
            files: Vec::new(),
            schemas: BTreeMap::new(),
        })
    }

    pub fn is_saved(&self) -> bool {
        self.dir.is_some()
    }

    fn write(&mut self, name: String, bytes: &[u8]) -> Result<(), CliError> {
        let dir = self.dir.as_ref().expect("saved output");
        let path = dir.join(&name);
        fs::write(&path, bytes).map_err(|e| CliError::Output(format!("{}: {e}", path.display())))?;
        self.files.push(name);
        Ok(())
    }

    /// Writes `<stem>.csv` or `<stem>.json`, or prints it when nothing is saved.
    pub fn table(&mut self, stem: &str, table: &Table) -> Result<(), CliError> {
        let (bytes, ext) = match self.format {
            Format::Csv => (table.to_csv()?, "csv"),
            Format::Json => {
                let mut b = serde_json::to_vec_pretty(&table.to_json())?;
                b.push(b'\n');
                (b, "json")
            }
        };
        self.schemas.insert(
            stem.to_string(),
            format!("{}:v{SCHEMA_VERSION}", table.columns.join(",")),
        );
        if self.is_saved() {
            self.write(format!("{stem}.{ext}"), &bytes)
        } else {
            std::io::stdout().write_all(&bytes)?;
            Ok(())
        }
    }

    /// Writes `<stem>.summary.json` when saving.
    pub fn summary(&mut self, stem: &str, value: &impl Serialize) -> Result<(), CliError> {
        if !self.is_saved() {
            return Ok(());
        }
        let mut bytes = serde_json::to_vec_pretty(value)?;
        bytes.push(b'\n');
        self.write(format!("{stem}.summary.json"), &bytes)
    }

    /// Appends one entry to `manifest.json` listing every file this run wrote.
    pub fn finish(self, mut entry: Value) -> Result<(), CliError> {
        let Some(dir) = self.dir else {
            return Ok(());
        };
        entry["outputs"] = json!(self.files);
        entry["schemas"] = json!(self.schemas);
        let path = dir.join("manifest.json");
        let mut runs = read_manifest(&path)?;
        runs.push(entry);
        let mut bytes = serde_json::to_vec_pretty(&runs)?;
        bytes.push(b'\n');
        fs::write(&path, bytes).map_err(|e| CliError::Output(format!("{}: {e}", path.display())))
    }
}

fn read_manifest(path: &Path) -> Result<Vec<Value>, CliError> {
    match fs::read_to_string(path) {
        Ok(text) => serde_json::from_str(&text)
            .map_err(|e| CliError::Output(format!("{}: {e}", path.display()))),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(Vec::new()),
        Err(e) => Err(CliError::Output(format!("{}: {e}", path.display()))),
    }
}
