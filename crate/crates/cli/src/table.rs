//! Tabular output shared by every subcommand: CSV with a header row, or a JSON
//! array of objects using the same field names.

use std::io::Write;

use anyhow::{Context, Result};
use serde_json::{Map, Number, Value};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    /// Decimal literal already formatted to the working precision.
    Num(String),
    Bool(bool),
    Text(String),
    Empty,
}

impl Cell {
    pub fn opt_num(v: Option<String>) -> Self {
        v.map(Cell::Num).unwrap_or(Cell::Empty)
    }

    fn csv_field(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Num(s) | Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
            Cell::Empty => String::new(),
        }
    }

    fn json_value(&self) -> Result<Value> {
        Ok(match self {
            Cell::Int(i) => Value::from(*i),
            // non-finite values have no JSON number form
            Cell::Num(s) => match s.parse::<Number>() {
                Ok(n) => Value::Number(n),
                Err(_) => Value::String(s.clone()),
            },
            Cell::Bool(b) => Value::Bool(*b),
            Cell::Text(s) => Value::String(s.clone()),
            Cell::Empty => Value::Null,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self { columns: columns.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width must match the header");
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::csv_field))?;
        }
        let bytes = w.into_inner().context("flushing CSV buffer")?;
        Ok(String::from_utf8(bytes)?)
    }

    pub fn to_json(&self) -> Result<String> {
        let mut records = Vec::with_capacity(self.rows.len());
        for row in &self.rows {
            let mut obj = Map::new();
            for (name, cell) in self.columns.iter().zip(row) {
                obj.insert((*name).to_string(), cell.json_value()?);
            }
            records.push(Value::Object(obj));
        }
        let mut s = serde_json::to_string_pretty(&Value::Array(records))?;
        s.push('\n');
        Ok(s)
    }

    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }

    /// Writes to `path`, or to stdout when `path` is `None`.
    pub fn emit(&self, format: Format, path: Option<&std::path::Path>) -> Result<()> {
        let text = self.render(format)?;
        match path {
            Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
            None => {
                let mut out = std::io::stdout().lock();
                out.write_all(text.as_bytes())?;
                out.flush()?;
                Ok(())
            }
        }
    }
}
