use std::io::{self, Write};

use clap::ValueEnum;
use serde::Serialize;
use serde_json::{Map, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Jsonl,
    Csv,
}

pub type Row = Map<String, Value>;

pub fn row<T: Serialize>(v: &T) -> Row {
    match serde_json::to_value(v).expect("serializable") {
        Value::Object(m) => m,
        other => Map::from_iter([("value".to_string(), other)]),
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => "-".into(),
        other => other.to_string(),
    }
}

/// Writes `rows` in the requested format. A single row in table format is
/// printed as `key value` lines, several rows as aligned columns.
pub fn emit(out: &mut impl Write, fmt: Format, rows: &[Row]) -> io::Result<()> {
    match fmt {
        Format::Jsonl => {
            for r in rows {
                writeln!(out, "{}", Value::Object(r.clone()))?;
            }
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            if let Some(first) = rows.first() {
                w.write_record(first.keys())?;
            }
            for r in rows {
                w.write_record(r.values().map(cell))?;
            }
            w.flush()?;
        }
        Format::Table if rows.len() == 1 => {
            let width = rows[0].keys().map(String::len).max().unwrap_or(0);
            for (k, v) in &rows[0] {
                writeln!(out, "{k:<width$}  {}", cell(v))?;
            }
        }
        Format::Table => {
            let Some(first) = rows.first() else { return Ok(()) };
            let keys: Vec<&String> = first.keys().collect();
            let grid: Vec<Vec<String>> =
                rows.iter().map(|r| keys.iter().map(|k| r.get(*k).map(cell).unwrap_or_default()).collect()).collect();
            let widths: Vec<usize> =
                keys.iter().enumerate().map(|(i, k)| grid.iter().map(|g| g[i].len()).chain([k.len()]).max().unwrap_or(0)).collect();
            let line = |cells: Vec<&str>| {
                cells.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect::<Vec<_>>().join("  ").trim_end().to_string()
            };
            writeln!(out, "{}", line(keys.iter().map(|k| k.as_str()).collect()))?;
            for g in &grid {
                writeln!(out, "{}", line(g.iter().map(String::as_str).collect()))?;
            }
        }
    }
    Ok(())
}
