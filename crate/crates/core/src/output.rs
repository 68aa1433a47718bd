//! Tabular output. Numbers are written with 17 significant digits so every
//! value parses back to the same `f64`; CSV uses LF line endings.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde_json::{Map, Number, Value};

use crate::config::OutputFormat;
use crate::error::{Error, Result};
use crate::fbm::{BundleKind, Grid, PathBundle};

/// `x` with 17 significant digits, e.g. `1.0000000000000000e-1`.
/// Non-finite values are written as `NaN`, `inf`, `-inf`.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(u64),
    Text(String),
    Empty,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Float(x) => fmt_f64(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            // parse the 17-digit text so CSV and JSON carry the same value
            Cell::Float(x) => Number::from_f64(fmt_f64(*x).parse().unwrap_or(*x))
                .map(Value::Number)
                .unwrap_or(Value::Null),
            Cell::Int(i) => Value::from(*i),
            Cell::Text(s) => Value::from(s.clone()),
            Cell::Empty => Value::Null,
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Empty, Cell::Float)
    }
}

impl From<usize> for Cell {
    fn from(i: usize) -> Self {
        Cell::Int(i as u64)
    }
}

impl From<u64> for Cell {
    fn from(i: u64) -> Self {
        Cell::Int(i)
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

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::csv)).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 input")
    }

    /// Array of objects keyed by the header.
    pub fn to_json(&self) -> String {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let obj: Map<String, Value> = self
                    .header
                    .iter()
                    .cloned()
                    .zip(row.iter().map(Cell::json))
                    .collect();
                Value::Object(obj)
            })
            .collect();
        let mut s = serde_json::to_string_pretty(&rows).expect("json values serialize");
        s.push('\n');
        s
    }

    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Csv => self.to_csv(),
            OutputFormat::Json => self.to_json(),
        }
    }

    /// Writes `dir/stem.{csv,json}` and returns the path.
    pub fn write(&self, dir: &Path, stem: &str, format: OutputFormat) -> Result<PathBuf> {
        let ext = match format {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        };
        let path = dir.join(format!("{stem}.{ext}"));
        write_file(&path, &self.render(format))?;
        Ok(path)
    }
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    w.write_all(contents.as_bytes())
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(path, e))
}

/// `t,path_1,…,path_N` with one row per grid node.
pub fn bundle_table(bundle: &PathBundle) -> Table {
    let n = bundle.len();
    let grid = bundle.grid();
    let mut table = Table::new(std::iter::once("t".to_string()).chain((1..=n).map(|i| format!("path_{i}"))));
    for j in 0..=grid.steps() {
        let mut row = Vec::with_capacity(n + 1);
        row.push(Cell::Float(grid.node(j)));
        row.extend(bundle.paths().map(|p| Cell::Float(p[j])));
        table.push(row);
    }
    table
}

/// Reads a bundle written by [`bundle_table`] (CSV). The grid is recovered
/// from the `t` column, which must be uniform and start at 0.
pub fn read_bundle(path: &Path, kind: BundleKind) -> Result<PathBundle> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new().from_reader(text.as_bytes());
    let bad = |m: String| Error::InvalidInput(format!("{}: {m}", path.display()));
    let header = reader.headers().map_err(|e| bad(e.to_string()))?.clone();
    if header.get(0) != Some("t") || header.len() < 2 {
        return Err(bad("expected header t,path_1,...".into()));
    }
    let n = header.len() - 1;
    let mut times = Vec::new();
    let mut columns = vec![Vec::new(); n];
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| bad(e.to_string()))?;
        let parse = |k: usize| -> Result<f64> {
            let field = record.get(k).unwrap_or("");
            field
                .trim()
                .parse::<f64>()
                .map_err(|e| bad(format!("row {}, column {}: `{field}`: {e}", line + 2, k + 1)))
        };
        times.push(parse(0)?);
        for (k, col) in columns.iter_mut().enumerate() {
            col.push(parse(k + 1)?);
        }
    }
    if times.len() < 2 {
        return Err(bad("need at least two grid nodes".into()));
    }
    let steps = times.len() - 1;
    let grid = Grid::new(times[steps], steps)?;
    for (j, &t) in times.iter().enumerate() {
        if (t - grid.node(j)).abs() > 1e-9 * grid.horizon().max(1.0) {
            return Err(Error::GridMismatch(format!(
                "{}: node {j} is {t}, expected {} on a uniform grid",
                path.display(),
                grid.node(j)
            )));
        }
    }
    PathBundle::from_rows(grid, &columns, kind)
}
