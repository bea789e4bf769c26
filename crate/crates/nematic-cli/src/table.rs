//! CSV and JSON emission with fixed 17-significant-digit reals.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(format!("unknown format {other:?} (expected csv or json)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Int(i64),
    Real(f64),
}

impl Cell {
    pub fn csv(&self) -> String {
        match *self {
            Cell::Int(i) => i.to_string(),
            Cell::Real(x) => real(x),
        }
    }

    pub fn json(&self) -> Value {
        match *self {
            Cell::Int(i) => json!(i),
            Cell::Real(x) if x.is_finite() => json!(x + 0.0),
            Cell::Real(_) => Value::Null,
        }
    }
}

/// 17 significant digits in scientific notation.
pub fn real(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        // adding zero folds -0 into +0
        format!("{:.16e}", x + 0.0)
    }
}

pub struct Table {
    pub comment: &'static str,
    pub columns: &'static [&'static str],
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(comment: &'static str, columns: &'static [&'static str]) -> Self {
        Self {
            comment,
            columns,
            rows: Vec::new(),
        }
    }

    pub fn csv_header(comment: &str, columns: &[&str]) -> String {
        format!("# {comment}\n{}\n", columns.join(","))
    }

    pub fn csv_row(row: &[Cell]) -> String {
        let cells: Vec<String> = row.iter().map(Cell::csv).collect();
        format!("{}\n", cells.join(","))
    }

    pub fn to_csv(&self) -> String {
        let mut s = Self::csv_header(self.comment, self.columns);
        for r in &self.rows {
            s.push_str(&Self::csv_row(r));
        }
        s
    }

    pub fn to_json(&self) -> Value {
        json!({
            "comment": self.comment,
            "columns": self.columns,
            "rows": self.rows.iter().map(|r| r.iter().map(Cell::json).collect::<Vec<_>>()).collect::<Vec<_>>(),
        })
    }
}

/// Output file, or stdout when no path is given.
pub fn open(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    match path {
        Some(p) => {
            let f = File::create(p).map_err(|e| CliError::Usage(format!("cannot create {}: {e}", p.display())))?;
            Ok(Box::new(BufWriter::new(f)))
        }
        None => Ok(Box::new(BufWriter::new(io::stdout().lock()))),
    }
}

/// `run.csv` → `run.summary.json` (or `.csv`).
pub fn sidecar(path: &Path, ext: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}.summary.{ext}"))
}

pub fn json_text(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values serialize");
    s.push('\n');
    s
}

pub fn write_all(out: &mut dyn Write, text: &str) -> Result<(), CliError> {
    out.write_all(text.as_bytes()).map_err(io_error)
}

pub fn io_error(e: io::Error) -> CliError {
    CliError::Usage(format!("write failed: {e}"))
}
