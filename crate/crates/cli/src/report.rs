//! Tabular reports and their three renderings.

use std::io::Write;

use clap::ValueEnum;
use serde_json::{Map, Value};

use crate::config::RunConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Json,
    Csv,
}

/// How a numeric column is shown in the human table.
#[derive(Debug, Clone, Copy)]
pub enum Display {
    Fixed(usize),
    /// Fixed with 6 decimals, scientific below 1e-3.
    Auto,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(u64),
    Num(f64),
    Text(String),
    Bool(bool),
    Missing,
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as u64)
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Bool(x)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_string())
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(x: Option<T>) -> Self {
        x.map_or(Cell::Missing, Into::into)
    }
}

/// Rounds to 12 significant digits, the precision of every machine-readable
/// number we emit.
pub fn sig12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().expect("formatted float parses")
}

fn num_value(x: f64) -> Value {
    serde_json::Number::from_f64(sig12(x)).map_or(Value::Null, Value::Number)
}

impl Cell {
    fn to_json(&self) -> Value {
        match self {
            Cell::Int(n) => Value::from(*n),
            Cell::Num(x) => num_value(*x),
            Cell::Text(s) => Value::from(s.as_str()),
            Cell::Bool(b) => Value::from(*b),
            Cell::Missing => Value::Null,
        }
    }

    fn to_csv(&self) -> String {
        match self {
            Cell::Int(n) => n.to_string(),
            Cell::Num(x) => format!("{}", sig12(*x)),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
            Cell::Missing => String::new(),
        }
    }

    fn to_display(&self, style: Display) -> String {
        match (self, style) {
            (Cell::Num(x), Display::Fixed(d)) => format!("{x:.d$}"),
            (Cell::Num(x), Display::Auto) => display_auto(*x),
            (Cell::Missing, _) => "-".to_string(),
            (other, _) => other.to_csv(),
        }
    }
}

fn display_auto(x: f64) -> String {
    if x != 0.0 && x.abs() < 1e-3 {
        format!("{x:.4e}")
    } else {
        format!("{x:.6}")
    }
}

#[derive(Debug, Clone)]
pub struct Column {
    pub name: &'static str,
    pub display: Display,
}

pub const fn col(name: &'static str, display: Display) -> Column {
    Column { name, display }
}

#[derive(Debug, Clone)]
pub struct Report {
    pub title: String,
    pub config: RunConfig,
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<Cell>>,
    pub limits: Vec<(&'static str, f64)>,
    pub condition: Option<bool>,
    /// Command-specific fields appended to the JSON object.
    pub extra: Map<String, Value>,
    /// Lines appended below the human table.
    pub notes: Vec<String>,
}

impl Report {
    pub fn new(title: impl Into<String>, config: RunConfig, columns: Vec<Column>) -> Self {
        Self {
            title: title.into(),
            config,
            columns,
            rows: Vec::new(),
            limits: Vec::new(),
            condition: None,
            extra: Map::new(),
            notes: Vec::new(),
        }
    }

    pub fn push_row(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_json(&self) -> Value {
        let mut obj = Map::new();
        obj.insert("config".into(), serde_json::to_value(&self.config).expect("config serializes"));
        let rows = self
            .rows
            .iter()
            .map(|row| {
                let mut r = Map::new();
                for (c, cell) in self.columns.iter().zip(row) {
                    r.insert(c.name.into(), cell.to_json());
                }
                Value::Object(r)
            })
            .collect();
        obj.insert("rows".into(), Value::Array(rows));
        let limits: Map<String, Value> = self.limits.iter().map(|(k, v)| (k.to_string(), num_value(*v))).collect();
        obj.insert("limits".into(), Value::Object(limits));
        obj.insert("condition".into(), self.condition.map_or(Value::Null, Value::Bool));
        for (k, v) in &self.extra {
            obj.insert(k.clone(), v.clone());
        }
        Value::Object(obj)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(self.columns.iter().map(|c| c.name))?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::to_csv))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_table<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let cells: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|row| row.iter().zip(&self.columns).map(|(cell, c)| cell.to_display(c.display)).collect())
            .collect();
        let widths: Vec<usize> = self
            .columns
            .iter()
            .enumerate()
            .map(|(i, c)| cells.iter().map(|r| r[i].len()).chain([c.name.len()]).max().unwrap_or(0))
            .collect();

        writeln!(out, "{}", self.title)?;
        let header: Vec<String> = self
            .columns
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{:>w$}", c.name))
            .collect();
        writeln!(out, "{}", header.join("  "))?;
        for row in &cells {
            let line: Vec<String> = row.iter().zip(&widths).map(|(s, w)| format!("{s:>w$}")).collect();
            writeln!(out, "{}", line.join("  "))?;
        }
        for (name, value) in &self.limits {
            writeln!(out, "{name}: {}", display_auto(*value))?;
        }
        if let Some(c) = self.condition {
            writeln!(out, "purification condition: {}", if c { "satisfied" } else { "violated" })?;
        }
        for note in &self.notes {
            writeln!(out, "{note}")?;
        }
        Ok(())
    }

    pub fn render(&self, format: Format) -> String {
        let mut buf = Vec::new();
        match format {
            Format::Table => self.write_table(&mut buf).expect("writing to memory"),
            Format::Csv => self.write_csv(&mut buf).expect("writing to memory"),
            Format::Json => {
                serde_json::to_writer_pretty(&mut buf, &self.to_json()).expect("writing to memory");
                buf.push(b'\n');
            }
        }
        String::from_utf8(buf).expect("reports are UTF-8")
    }
}
