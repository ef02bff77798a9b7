//! Rendering: CSV tables and the JSON result envelope.
//!
//! JSON objects are `serde_json` maps, which keep keys sorted, and floats
//! print in shortest round-trip form, so identical runs produce identical
//! bytes.

use std::collections::BTreeMap;
use std::io::Write;

use clap::ValueEnum;
use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::numerics::SummationMode;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

fn io_err(e: std::io::Error) -> Error {
    Error::Input(format!("cannot write output: {e}"))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Envelope {
    pub command: String,
    pub parameters: BTreeMap<String, Value>,
    pub results: Value,
    pub mode: String,
    pub tool_version: String,
}

impl Envelope {
    pub fn new(command: &str, mode: SummationMode, results: Value) -> Self {
        Self {
            command: command.to_string(),
            parameters: BTreeMap::new(),
            results,
            mode: mode.to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }

    pub fn param(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.parameters.insert(key.to_string(), value.into());
        self
    }

    /// Canonical form: every object level with sorted keys.
    pub fn to_value(&self) -> Value {
        serde_json::to_value(self).expect("envelope is plain data")
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_value()).expect("envelope is plain data")
    }

    pub fn write_json(&self, out: &mut dyn Write) -> Result<()> {
        writeln!(out, "{}", self.to_json_string()).map_err(io_err)
    }

    /// `field,value` rows for the flattened results, preceded by the
    /// command, mode and parameters.
    pub fn write_flat_csv(&self, out: &mut dyn Write) -> Result<()> {
        let mut table = CsvTable::new(out, &["field", "value"])?;
        table.row(&[Value::from("command"), Value::from(self.command.as_str())])?;
        table.row(&[Value::from("mode"), Value::from(self.mode.as_str())])?;
        for (key, value) in &self.parameters {
            table.row(&[Value::from(format!("parameters.{key}")), value.clone()])?;
        }
        let mut flat = Vec::new();
        flatten("results", &self.results, &mut flat);
        for (key, value) in flat {
            table.row(&[Value::from(key), value])?;
        }
        table.finish()
    }
}

fn flatten(prefix: &str, value: &Value, out: &mut Vec<(String, Value)>) {
    match value {
        Value::Object(map) => {
            for (k, v) in map {
                flatten(&format!("{prefix}.{k}"), v, out);
            }
        }
        Value::Array(items) => {
            for (i, v) in items.iter().enumerate() {
                flatten(&format!("{prefix}.{i}"), v, out);
            }
        }
        leaf => out.push((prefix.to_string(), leaf.clone())),
    }
}

/// Render a scalar cell. Numbers keep their full round-trip precision;
/// strings are quoted only when they would break the row.
pub fn csv_cell(value: &Value) -> String {
    let text = match value {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    };
    if text.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", text.replace('"', "\"\""))
    } else {
        text
    }
}

/// Streaming CSV writer with a fixed header.
pub struct CsvTable<'a> {
    out: std::io::BufWriter<&'a mut dyn Write>,
    width: usize,
}

impl<'a> CsvTable<'a> {
    pub fn new(out: &'a mut dyn Write, header: &[&str]) -> Result<Self> {
        let mut out = std::io::BufWriter::new(out);
        writeln!(out, "{}", header.join(",")).map_err(io_err)?;
        Ok(Self {
            out,
            width: header.len(),
        })
    }

    pub fn row(&mut self, cells: &[Value]) -> Result<()> {
        debug_assert_eq!(cells.len(), self.width);
        let line: Vec<String> = cells.iter().map(csv_cell).collect();
        writeln!(self.out, "{}", line.join(",")).map_err(io_err)
    }

    pub fn finish(mut self) -> Result<()> {
        self.out.flush().map_err(io_err)
    }
}
