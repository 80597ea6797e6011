//! Canonical JSON and CSV output with atomic file replacement.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use serde_json::Value;

use crate::problem::ValidationError;
use crate::run::{Report, RunError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// 17 significant digits round-trip every f64 exactly.
fn float(v: f64) -> String {
    format!("{v:.16e}")
}

fn write_value(out: &mut String, v: &Value, indent: usize) {
    let pad = |out: &mut String, k: usize| out.extend(std::iter::repeat_n("  ", k));
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => match (n.as_i64(), n.as_u64(), n.as_f64()) {
            (Some(i), _, _) => write!(out, "{i}").unwrap(),
            (_, Some(u), _) => write!(out, "{u}").unwrap(),
            (_, _, Some(f)) => out.push_str(&float(f)),
            _ => unreachable!(),
        },
        Value::String(s) => out.push_str(&serde_json::to_string(s).unwrap()),
        Value::Array(a) if a.is_empty() => out.push_str("[]"),
        Value::Array(a) => {
            out.push_str("[\n");
            for (i, x) in a.iter().enumerate() {
                pad(out, indent + 1);
                write_value(out, x, indent + 1);
                out.push_str(if i + 1 < a.len() { ",\n" } else { "\n" });
            }
            pad(out, indent);
            out.push(']');
        }
        Value::Object(m) if m.is_empty() => out.push_str("{}"),
        Value::Object(m) => {
            let mut keys: Vec<&String> = m.keys().collect();
            keys.sort();
            out.push_str("{\n");
            for (i, k) in keys.iter().enumerate() {
                pad(out, indent + 1);
                out.push_str(&serde_json::to_string(k).unwrap());
                out.push_str(": ");
                write_value(out, &m[*k], indent + 1);
                out.push_str(if i + 1 < keys.len() { ",\n" } else { "\n" });
            }
            pad(out, indent);
            out.push('}');
        }
    }
}

/// Sorted keys, integers as integers, floats with 17 significant digits.
pub fn canonical_json(v: &Value) -> String {
    let mut out = String::new();
    write_value(&mut out, v, 0);
    out.push('\n');
    out
}

pub fn report_json(report: &Report) -> String {
    canonical_json(&serde_json::to_value(report).expect("report serializes"))
}

/// One row per parameter sample, one column per eigenvalue index.
pub fn report_csv(report: &Report) -> Result<String, RunError> {
    let rows = report.trace.as_ref().ok_or_else(|| {
        RunError::Validation(ValidationError::new(
            "numerics.trace_samples",
            "report has no eigenvalue trace; use `trace` or set numerics.trace_samples",
        ))
    })?;
    let width = rows.iter().map(|r| r.eigenvalues.len()).max().unwrap_or(0);
    let mut w = csv::Writer::from_writer(Vec::new());
    let header: Vec<String> = std::iter::once("s".to_string())
        .chain((0..width).map(|i| format!("lambda_{i}")))
        .collect();
    let csv_err = |e: csv::Error| RunError::Io {
        path: "csv".into(),
        message: e.to_string(),
    };
    w.write_record(&header).map_err(csv_err)?;
    for r in rows {
        let mut rec = vec![float(r.s)];
        rec.extend(r.eigenvalues.iter().map(|&v| float(v)));
        rec.resize(width + 1, String::new());
        w.write_record(&rec).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| RunError::Io {
        path: "csv".into(),
        message: e.to_string(),
    })?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

pub fn render(report: &Report, format: Format) -> Result<String, RunError> {
    match format {
        Format::Json => Ok(report_json(report)),
        Format::Csv => report_csv(report),
    }
}

/// Write through a temporary file in the destination directory, then rename.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), RunError> {
    let io = |e: std::io::Error| RunError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(contents.as_bytes()).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

pub fn emit(report: &Report, format: Format, out: &Path) -> Result<(), RunError> {
    write_atomic(out, &render(report, format)?)
}
