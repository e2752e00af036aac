//! Self-describing tabular output: CSV with a `#` metadata header, or a
//! JSON object carrying the same metadata, columns and rows.

use std::io::Write;

use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::Result;

pub const TOOL: &str = "ranksinr";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl std::fmt::Display for Cell {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Cell::Num(v) if *v == 0.0 || !v.is_finite() || (1e-4..1e15).contains(&v.abs()) => {
                write!(f, "{v}")
            }
            Cell::Num(v) => write!(f, "{v:e}"),
            Cell::Int(v) => write!(f, "{v}"),
            Cell::Text(s) if s.contains([',', '"', '\n']) => {
                write!(f, "\"{}\"", s.replace('"', "\"\""))
            }
            Cell::Text(s) => f.write_str(s),
        }
    }
}

/// Ordered key/value metadata; insertion order is preserved in the output.
#[derive(Debug, Clone, Default)]
pub struct Metadata {
    entries: Vec<(String, Value)>,
}

impl Metadata {
    /// Starts with the tool name, version and command.
    pub fn new(command: &str) -> Self {
        let mut m = Metadata::default();
        m.set("tool", TOOL)
            .set("version", VERSION)
            .set("command", command);
        m
    }

    pub fn set(&mut self, key: &str, value: impl Into<Value>) -> &mut Self {
        let value = value.into();
        match self.entries.iter_mut().find(|(k, _)| k == key) {
            Some(slot) => slot.1 = value,
            None => self.entries.push((key.to_string(), value)),
        }
        self
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }

    fn to_map(&self) -> Map<String, Value> {
        self.entries.iter().cloned().collect()
    }
}

#[derive(Debug, Clone, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Table {
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

pub fn write_csv(meta: &Metadata, table: &Table, out: &mut impl Write) -> Result<()> {
    for (k, v) in &meta.entries {
        let text = match v {
            Value::String(s) => s.clone(),
            other => other.to_string(),
        };
        writeln!(out, "# {k}: {text}")?;
    }
    writeln!(out, "{}", table.columns.join(","))?;
    for row in &table.rows {
        let line: Vec<String> = row.iter().map(|c| c.to_string()).collect();
        writeln!(out, "{}", line.join(","))?;
    }
    Ok(())
}

pub fn write_json(meta: &Metadata, table: &Table, out: &mut impl Write) -> Result<()> {
    let doc = serde_json::json!({
        "metadata": meta.to_map(),
        "columns": table.columns,
        "rows": table.rows,
    });
    serde_json::to_writer_pretty(&mut *out, &doc).map_err(std::io::Error::from)?;
    writeln!(out)?;
    Ok(())
}

pub fn write(format: Format, meta: &Metadata, table: &Table, out: &mut impl Write) -> Result<()> {
    match format {
        Format::Csv => write_csv(meta, table, out),
        Format::Json => write_json(meta, table, out),
    }
}
