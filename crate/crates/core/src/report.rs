//! Field-by-field comparison of two JSON reports.

use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::scalar::parse_rational;

/// Keys that legitimately differ between runs and are skipped.
const VOLATILE: &[&str] = &["timing", "version"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { rel: 1e-12, abs: 1e-12 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiffRow {
    pub path: String,
    pub kind: &'static str,
    pub left: String,
    pub right: String,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiffReport {
    pub tolerance: Tolerance,
    pub compared: usize,
    pub failed: usize,
    pub passed: bool,
    pub rows: Vec<DiffRow>,
}

/// Compares two reports. Rational strings must match exactly, floats within
/// `tol`, everything else verbatim. Differing keys, array lengths or value
/// types are a schema mismatch.
pub fn report_diff(a: &Value, b: &Value, tol: Tolerance) -> Result<DiffReport> {
    let mut rows = Vec::new();
    walk(a, b, "$", tol, &mut rows)?;
    let failed = rows.iter().filter(|r| !r.passed).count();
    Ok(DiffReport {
        tolerance: tol,
        compared: rows.len(),
        failed,
        passed: failed == 0,
        rows,
    })
}

fn mismatch(path: &str, what: impl std::fmt::Display) -> Error {
    Error::SchemaMismatch(format!("{path}: {what}"))
}

fn kind(v: &Value) -> &'static str {
    match v {
        Value::Null => "null",
        Value::Bool(_) => "bool",
        Value::Number(_) => "number",
        Value::String(_) => "string",
        Value::Array(_) => "array",
        Value::Object(_) => "object",
    }
}

fn walk(a: &Value, b: &Value, path: &str, tol: Tolerance, rows: &mut Vec<DiffRow>) -> Result<()> {
    match (a, b) {
        (Value::Object(x), Value::Object(y)) => {
            let kx: Vec<_> = x.keys().filter(|k| !VOLATILE.contains(&k.as_str())).collect();
            let ky: Vec<_> = y.keys().filter(|k| !VOLATILE.contains(&k.as_str())).collect();
            if kx != ky {
                return Err(mismatch(path, format!("keys {kx:?} vs {ky:?}")));
            }
            for k in kx {
                walk(&x[k], &y[k], &format!("{path}.{k}"), tol, rows)?;
            }
            Ok(())
        }
        (Value::Array(x), Value::Array(y)) => {
            if x.len() != y.len() {
                return Err(mismatch(path, format!("length {} vs {}", x.len(), y.len())));
            }
            for (i, (p, q)) in x.iter().zip(y).enumerate() {
                walk(p, q, &format!("{path}[{i}]"), tol, rows)?;
            }
            Ok(())
        }
        (Value::Number(x), Value::Number(y)) => {
            let (p, q) = (x.as_f64().unwrap_or(f64::NAN), y.as_f64().unwrap_or(f64::NAN));
            let (k, passed) = if x.is_f64() || y.is_f64() {
                ("float", (p - q).abs() <= tol.abs + tol.rel * p.abs().max(q.abs()))
            } else {
                ("integer", x == y)
            };
            rows.push(row(path, k, a, b, passed));
            Ok(())
        }
        (Value::String(x), Value::String(y)) => {
            let exact = parse_rational(x).and_then(|p| parse_rational(y).map(|q| p == q));
            let (k, passed) = match exact {
                Ok(eq) => ("rational", eq),
                Err(_) => ("string", x == y),
            };
            rows.push(row(path, k, a, b, passed));
            Ok(())
        }
        (Value::Bool(x), Value::Bool(y)) => {
            rows.push(row(path, "bool", a, b, x == y));
            Ok(())
        }
        (Value::Null, Value::Null) => Ok(()),
        _ => Err(mismatch(path, format!("{} vs {}", kind(a), kind(b)))),
    }
}

fn row(path: &str, kind: &'static str, a: &Value, b: &Value, passed: bool) -> DiffRow {
    DiffRow {
        path: path.to_string(),
        kind,
        left: a.to_string(),
        right: b.to_string(),
        passed,
    }
}

/// Plain-text pass/fail table.
pub fn render_table(report: &DiffReport) -> String {
    let width = report.rows.iter().map(|r| r.path.len()).max().unwrap_or(4).max(4);
    let mut out = format!("{:<width$}  {:<8}  {:<6}  left / right\n", "path", "kind", "status");
    for r in &report.rows {
        let status = if r.passed { "PASS" } else { "FAIL" };
        out.push_str(&format!("{:<width$}  {:<8}  {:<6}  {} / {}\n", r.path, r.kind, status, r.left, r.right));
    }
    out.push_str(&format!(
        "{} compared, {} failed: {}\n",
        report.compared,
        report.failed,
        if report.passed { "PASS" } else { "FAIL" }
    ));
    out
}
