use std::fs;
use std::io::Write;
use std::path::Path;

use serde_json::Value;

use symfun_core::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// Shortest decimal that reads back to the same `f64`.
pub fn fnum(v: f64) -> String {
    format!("{v:?}")
}

/// Rows for the CSV form of a result.
#[derive(Debug, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    /// `(x, y)` float pairs, the usual shape of a plotted series.
    pub fn series(header: [&str; 2], pts: &[(f64, f64)]) -> Self {
        let mut t = Table::new(&header);
        for (x, y) in pts {
            t.push(vec![fnum(*x), fnum(*y)]);
        }
        t
    }

    /// One `key,value` row per scalar field of a JSON object.
    pub fn fields(v: &Value) -> Self {
        let mut t = Table::new(&["key", "value"]);
        if let Value::Object(map) = v {
            for (k, v) in map {
                match v {
                    Value::Array(_) | Value::Object(_) => {}
                    Value::String(s) => t.push(vec![k.clone(), s.clone()]),
                    other => t.push(vec![k.clone(), other.to_string()]),
                }
            }
        }
        t
    }

    fn render(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::Invalid(format!("csv: {e}"));
        w.write_record(&self.header).map_err(io)?;
        for r in &self.rows {
            w.write_record(r).map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Invalid(format!("csv: {e}")))?;
        String::from_utf8(bytes).map_err(|e| Error::Invalid(e.to_string()))
    }
}

pub struct Output {
    pub json: Value,
    pub table: Table,
}

impl Output {
    pub fn new(json: Value, table: Table) -> Self {
        Output { json, table }
    }

    pub fn write(&self, format: Format, out: Option<&Path>) -> Result<()> {
        let text = match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&self.json).expect("values serialize");
                s.push('\n');
                s
            }
            Format::Csv => self.table.render()?,
        };
        match out {
            Some(p) => fs::write(p, text).map_err(|e| Error::Invalid(format!("cannot write {}: {e}", p.display()))),
            None => {
                let mut stdout = std::io::stdout().lock();
                stdout.write_all(text.as_bytes()).map_err(|e| Error::Invalid(format!("stdout: {e}")))
            }
        }
    }
}
