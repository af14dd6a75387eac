use nalgebra::DMatrix;
use serde_json::{json, Value};

use super::config::RunConfig;
use crate::error::Result;
use crate::linalg::CMatrix;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// 17 significant digits, enough to round-trip any double.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn rows(m: &DMatrix<f64>) -> Value {
    Value::from(m.row_iter().map(|r| r.iter().copied().collect::<Vec<_>>()).collect::<Vec<_>>())
}

pub fn complex_rows(m: &CMatrix) -> Value {
    json!({ "re": rows(&m.map(|z| z.re)), "im": rows(&m.map(|z| z.im)) })
}

/// Common metadata block of every JSON output.
pub fn header(config: &RunConfig) -> serde_json::Map<String, Value> {
    let mut m = serde_json::Map::new();
    m.insert("version".into(), VERSION.into());
    m.insert("command".into(), config.name().into());
    m.insert("seed".into(), config.seed().map_or(Value::Null, Value::from));
    m.insert("config".into(), serde_json::to_value(config).expect("config serializes"));
    m
}

pub fn json_document(value: &Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("value serializes");
    s.push('\n');
    s
}

/// CSV body preceded by `#` lines carrying the version, seed and config.
pub fn csv_document(
    config: &RunConfig,
    comments: &[String],
    header: &[&str],
    body: impl IntoIterator<Item = Vec<String>>,
) -> Result<String> {
    let mut out = String::new();
    out.push_str(&format!("# version {VERSION}\n"));
    out.push_str(&format!("# seed {}\n", config.seed().map_or("none".to_string(), |s| s.to_string())));
    out.push_str(&format!("# config {}\n", serde_json::to_string(config)?));
    for c in comments {
        out.push_str(&format!("# {c}\n"));
    }
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(Vec::new());
    w.write_record(header)?;
    for row in body {
        w.write_record(&row)?;
    }
    let bytes = w.into_inner().map_err(|e| std::io::Error::other(e.to_string()))?;
    out.push_str(std::str::from_utf8(&bytes).expect("csv writes utf-8"));
    Ok(out)
}

/// The part of a CSV document after the `#` lines.
pub fn csv_body(doc: &str) -> &str {
    let mut rest = doc;
    while rest.starts_with('#') {
        rest = rest.split_once('\n').map_or("", |(_, r)| r);
    }
    rest
}
