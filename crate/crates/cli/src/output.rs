//! JSON is the canonical record; CSV flattens nested keys with `.` and emits
//! one line per entry of a top-level `rows` array.

use clap::ValueEnum;
use serde_json::{Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

pub fn render(v: &Value, format: Format) -> Result<String, Box<dyn std::error::Error>> {
    match format {
        Format::Json => Ok(serde_json::to_string_pretty(v)? + "\n"),
        Format::Csv => csv_text(v),
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    match v {
        Value::Object(map) => {
            for (k, x) in map {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, x, out);
            }
        }
        Value::Array(items) => {
            let joined: Vec<String> = items
                .iter()
                .map(|x| match x {
                    Value::String(s) => s.clone(),
                    other => other.to_string(),
                })
                .collect();
            out.push((prefix.to_string(), joined.join(";")));
        }
        Value::String(s) => out.push((prefix.to_string(), s.clone())),
        Value::Null => out.push((prefix.to_string(), String::new())),
        other => out.push((prefix.to_string(), other.to_string())),
    }
}

fn csv_text(v: &Value) -> Result<String, Box<dyn std::error::Error>> {
    let mut head = v.as_object().cloned().unwrap_or_default();
    let rows = match head.remove("rows") {
        Some(Value::Array(rows)) if !rows.is_empty() => rows,
        _ => vec![Value::Object(Map::new())],
    };
    let mut common = Vec::new();
    flatten("", &Value::Object(head), &mut common);
    let mut w = csv::Writer::from_writer(Vec::new());
    for (k, row) in rows.iter().enumerate() {
        let mut cells = common.clone();
        flatten("row", row, &mut cells);
        if k == 0 {
            w.write_record(cells.iter().map(|c| c.0.as_str()))?;
        }
        w.write_record(cells.iter().map(|c| c.1.as_str()))?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}
