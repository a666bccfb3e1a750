//! CSV and JSON writers.
//!
//! Floats are printed with 17 significant digits (`{:.16e}`), which is enough
//! to read every binary64 value back exactly. Output depends only on the
//! records, so identical runs give identical bytes.

use std::fmt::Write as _;
use std::io;
use std::path::Path;

use crate::config::Format;
use crate::run::{Cell, Summary, Table};

pub fn float(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x:.16e}")
    }
}

fn csv_field(cell: &Cell) -> String {
    match cell {
        Cell::Float(x) => float(*x),
        Cell::Int(n) => n.to_string(),
        Cell::Text(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
        Cell::Text(s) => s.clone(),
        Cell::Missing | Cell::List(_) | Cell::Object(_) => String::new(),
    }
}

fn json_string(s: &str) -> String {
    serde_json::Value::String(s.to_string()).to_string()
}

fn json_value(cell: &Cell) -> String {
    match cell {
        Cell::Float(x) if x.is_finite() => float(*x),
        Cell::Float(_) | Cell::Missing => "null".into(),
        Cell::Int(n) => n.to_string(),
        Cell::Text(s) => json_string(s),
        Cell::List(items) => {
            let parts: Vec<String> = items.iter().map(json_value).collect();
            format!("[{}]", parts.join(", "))
        }
        Cell::Object(fields) => {
            let parts: Vec<String> = fields
                .iter()
                .map(|(k, v)| format!("{}: {}", json_string(k), json_value(v)))
                .collect();
            format!("{{{}}}", parts.join(", "))
        }
    }
}

pub fn to_csv(table: &Table) -> String {
    let mut out = table.columns.join(",");
    out.push('\n');
    for row in &table.rows {
        let fields: Vec<String> = row.iter().map(csv_field).collect();
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

/// An array of objects keyed by the CSV column names.
pub fn to_json(table: &Table) -> String {
    if table.rows.is_empty() {
        return "[]\n".into();
    }
    let mut out = String::from("[\n");
    for (i, row) in table.rows.iter().enumerate() {
        let fields: Vec<String> = table
            .columns
            .iter()
            .zip(row)
            .map(|(c, v)| format!("{}: {}", json_string(c), json_value(v)))
            .collect();
        let sep = if i + 1 == table.rows.len() { "" } else { "," };
        let _ = writeln!(out, "  {{{}}}{sep}", fields.join(", "));
    }
    out.push_str("]\n");
    out
}

pub fn render(table: &Table, format: Format) -> String {
    match format {
        Format::Csv => to_csv(table),
        Format::Json => to_json(table),
    }
}

pub fn emit(table: &Table, format: Format, path: &Path) -> io::Result<()> {
    std::fs::write(path, render(table, format))
}

pub fn summary_json(summary: &Summary) -> String {
    let mut fields: Vec<(String, Cell)> = vec![
        ("task".into(), summary.task.as_str().into()),
        ("status".into(), summary.status().into()),
    ];
    fields.extend(summary.entries.iter().cloned());
    let events = summary
        .boundaries
        .iter()
        .map(|b| {
            Cell::Object(vec![
                ("kind".into(), b.kind.as_str().into()),
                ("x".into(), b.x.into()),
                ("t".into(), b.t.into()),
            ])
        })
        .collect();
    fields.push(("boundary_events".into(), Cell::List(events)));
    let failures = summary
        .failures
        .iter()
        .map(|f| Cell::Text(f.clone()))
        .collect();
    fields.push(("failures".into(), Cell::List(failures)));

    let mut out = String::from("{\n");
    for (i, (k, v)) in fields.iter().enumerate() {
        let sep = if i + 1 == fields.len() { "" } else { "," };
        let _ = writeln!(out, "  {}: {}{sep}", json_string(k), json_value(v));
    }
    out.push_str("}\n");
    out
}
