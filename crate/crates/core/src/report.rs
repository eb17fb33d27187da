//! Tabular output as CSV or JSON, written atomically.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::Parse(format!("unknown format '{other}' (csv or json)"))),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Csv => "csv",
            Format::Json => "json",
        })
    }
}

/// Homogeneous records: every row has one value per column.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Value>) -> Result<()> {
        if row.len() != self.columns.len() {
            return Err(Error::InvalidArgument(format!(
                "row has {} values, table has {} columns",
                row.len(),
                self.columns.len()
            )));
        }
        self.rows.push(row);
        Ok(())
    }

    /// Records serializing to JSON objects with exactly the given keys.
    pub fn from_records<T: Serialize>(columns: &[&str], records: &[T]) -> Result<Self> {
        let mut table = Table::new(columns);
        for r in records {
            let value = serde_json::to_value(r).map_err(|e| Error::Parse(e.to_string()))?;
            let Value::Object(mut map) = value else {
                return Err(Error::InvalidArgument("records must serialize to objects".into()));
            };
            if map.len() != columns.len() {
                return Err(Error::InvalidArgument("records are not homogeneous".into()));
            }
            let row = columns
                .iter()
                .map(|c| map.remove(*c).ok_or_else(|| Error::InvalidArgument(format!("record lacks field '{c}'"))))
                .collect::<Result<Vec<_>>>()?;
            table.rows.push(row);
        }
        Ok(table)
    }

    /// Appends a column holding the same value in every row.
    pub fn with_constant(mut self, name: &str, value: Value) -> Self {
        self.columns.push(name.to_string());
        for row in &mut self.rows {
            row.push(value.clone());
        }
        self
    }
}

fn csv_cell(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

/// Renders the table; floats use the shortest representation that
/// round-trips, so no digits beyond the 17 significant ones are printed.
pub fn render(table: &Table, format: Format) -> Result<String> {
    match format {
        Format::Csv => {
            let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
            w.write_record(&table.columns).map_err(|e| Error::Io(e.to_string()))?;
            for row in &table.rows {
                w.write_record(row.iter().map(csv_cell)).map_err(|e| Error::Io(e.to_string()))?;
            }
            let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
            String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
        }
        Format::Json => {
            let items: Vec<Value> = table
                .rows
                .iter()
                .map(|row| {
                    let map: Map<String, Value> = table.columns.iter().cloned().zip(row.iter().cloned()).collect();
                    Value::Object(map)
                })
                .collect();
            let mut s = serde_json::to_string_pretty(&Value::Array(items)).map_err(|e| Error::Io(e.to_string()))?;
            s.push('\n');
            Ok(s)
        }
    }
}

/// Writes `contents` to a temporary sibling of `path`, then renames it into place.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().ok_or_else(|| Error::Io(format!("'{}' is not a file path", path.display())))?;
    let tmp = dir.join(format!(".{}.{}.tmp", name.to_string_lossy(), std::process::id()));
    let io = |e: std::io::Error| Error::Io(format!("{}: {e}", path.display()));
    let mut file = fs::File::create(&tmp).map_err(io)?;
    file.write_all(contents.as_bytes()).map_err(io)?;
    file.sync_all().map_err(io)?;
    drop(file);
    fs::rename(&tmp, path).map_err(|e| {
        let _ = fs::remove_file(&tmp);
        io(e)
    })
}

pub fn emit_report(table: &Table, format: Format, path: &Path) -> Result<()> {
    write_atomic(path, &render(table, format)?)
}

/// Inverse of [`render`] for JSON output and for CSV output whose cells are
/// numbers, booleans or plain strings.
pub fn parse_report(text: &str, format: Format) -> Result<Table> {
    match format {
        Format::Json => {
            let value: Value = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
            let Value::Array(items) = value else {
                return Err(Error::Parse("expected a JSON array".into()));
            };
            let mut columns: Option<Vec<String>> = None;
            let mut rows = Vec::with_capacity(items.len());
            for item in items {
                let Value::Object(map) = item else {
                    return Err(Error::Parse("expected an array of objects".into()));
                };
                let keys: Vec<String> = map.keys().cloned().collect();
                match &columns {
                    None => columns = Some(keys),
                    Some(c) if *c != keys => return Err(Error::Parse("records are not homogeneous".into())),
                    _ => {}
                }
                rows.push(map.into_iter().map(|(_, v)| v).collect());
            }
            Ok(Table { columns: columns.unwrap_or_default(), rows })
        }
        Format::Csv => {
            let mut r = csv::ReaderBuilder::new().from_reader(text.as_bytes());
            let columns: Vec<String> =
                r.headers().map_err(|e| Error::Parse(e.to_string()))?.iter().map(str::to_string).collect();
            let mut rows = Vec::new();
            for rec in r.records() {
                let rec = rec.map_err(|e| Error::Parse(e.to_string()))?;
                rows.push(
                    rec.iter()
                        .map(|cell| match serde_json::from_str::<Value>(cell) {
                            Ok(v @ (Value::Number(_) | Value::Bool(_))) => v,
                            _ => Value::String(cell.to_string()),
                        })
                        .collect(),
                );
            }
            Ok(Table { columns, rows })
        }
    }
}
