//! Report serialization.

use crate::args::Format;
use crate::CliError;
use serde_json::Value;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;

/// `key.path  value` lines, keys padded to a common width.
pub fn to_text(report: &Value) -> String {
    let mut rows = Vec::new();
    flatten("", report, &mut rows);
    let width = rows.iter().map(|(k, _)| k.chars().count()).max().unwrap_or(0);
    let mut s = String::new();
    for (k, v) in rows {
        let pad = width - k.chars().count();
        let _ = writeln!(s, "{k}{}  {v}", " ".repeat(pad));
    }
    s
}

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::Null => Some("-".into()),
        Value::Bool(b) => Some(b.to_string()),
        Value::Number(n) => Some(n.to_string()),
        Value::String(s) => Some(s.clone()),
        _ => None,
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    let key = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match v {
        Value::Object(map) => {
            for (k, x) in map {
                flatten(&key(k), x, out);
            }
        }
        Value::Array(xs) => {
            if let Some(items) = xs.iter().map(scalar).collect::<Option<Vec<_>>>() {
                out.push((prefix.to_string(), items.join(", ")));
            } else {
                for (i, x) in xs.iter().enumerate() {
                    flatten(&key(&i.to_string()), x, out);
                }
            }
        }
        other => out.push((prefix.to_string(), scalar(other).unwrap_or_default())),
    }
}

pub fn render(report: &Value, format: Format) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(report).expect("reports are plain JSON");
            s.push('\n');
            s
        }
        Format::Text => to_text(report),
    }
}

pub fn emit(text: &str, output: &Option<PathBuf>) -> Result<(), CliError> {
    match output {
        Some(path) => std::fs::write(path, text).map_err(|source| CliError::Write { path: path.clone(), source }),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).map_err(|source| CliError::Write { path: "<stdout>".into(), source })
        }
    }
}
