//! Rendering of command results. Every command produces one JSON value; the
//! csv and human formats are views of it.

use std::fmt::Write as _;

use clap::ValueEnum;
use serde_json::{Map, Value};

pub const SCHEMA: u64 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Human,
}

/// Moves every timing field (`*_ms`, `timing`) into a top-level `timing`
/// object keyed by its dotted path, so the rest of the value is reproducible.
pub fn isolate_timing(mut v: Value) -> Value {
    let mut timing = Map::new();
    strip_timing(&mut v, "", &mut timing);
    if let Value::Object(m) = &mut v {
        m.insert("timing".into(), Value::Object(timing));
    }
    v
}

fn strip_timing(v: &mut Value, path: &str, out: &mut Map<String, Value>) {
    match v {
        Value::Object(m) => {
            let keys: Vec<String> = m.keys().cloned().collect();
            for k in keys {
                let p = if path.is_empty() { k.clone() } else { format!("{path}.{k}") };
                if k.ends_with("_ms") || k == "timing" {
                    let taken = m.remove(&k).unwrap();
                    flatten_into(&taken, &p, out);
                } else {
                    strip_timing(m.get_mut(&k).unwrap(), &p, out);
                }
            }
        }
        Value::Array(a) => {
            for (i, x) in a.iter_mut().enumerate() {
                strip_timing(x, &format!("{path}.{i}"), out);
            }
        }
        _ => {}
    }
}

fn flatten_into(v: &Value, path: &str, out: &mut Map<String, Value>) {
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                flatten_into(x, &format!("{path}.{k}"), out);
            }
        }
        other => {
            out.insert(path.to_string(), other.clone());
        }
    }
}

pub fn render(v: &Value, format: Format) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(v).expect("values serialise");
            s.push('\n');
            s
        }
        Format::Csv => {
            if let Some(table) = v.get("table") {
                return csv_table(table);
            }
            let mut rows = Map::new();
            flatten_into(v, "", &mut rows);
            let mut s = String::from("key,value\n");
            for (k, x) in rows {
                let _ = writeln!(s, "{},{}", csv_cell(k.trim_start_matches('.')), csv_cell(&scalar(&x)));
            }
            s
        }
        Format::Human => {
            let mut s = String::new();
            human(v, 0, &mut s);
            s
        }
    }
}

/// `table` is `{columns: [..], rows: [[..], ..]}`.
fn csv_table(table: &Value) -> String {
    let cols: Vec<String> = table["columns"].as_array().into_iter().flatten().map(scalar).collect();
    let mut s = cols.join(",");
    s.push('\n');
    for row in table["rows"].as_array().into_iter().flatten() {
        let cells: Vec<String> = row.as_array().into_iter().flatten().map(|c| csv_cell(&scalar(c))).collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    s
}

fn csv_cell(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

fn is_flat(v: &Value) -> bool {
    match v {
        Value::Array(a) => a.iter().all(|x| !x.is_object() && !x.is_array()),
        Value::Object(_) => false,
        _ => true,
    }
}

fn human(v: &Value, depth: usize, s: &mut String) {
    let pad = "  ".repeat(depth);
    match v {
        Value::Object(m) => {
            if let Some(t) = m.get("table") {
                human_table(t, depth, s);
            }
            for (k, x) in m {
                if k == "table" || x.as_object().is_some_and(|o| o.is_empty()) {
                    continue;
                }
                if is_flat(x) {
                    let _ = writeln!(s, "{pad}{k}: {}", inline(x));
                } else {
                    let _ = writeln!(s, "{pad}{k}:");
                    human(x, depth + 1, s);
                }
            }
        }
        Value::Array(a) => {
            for (i, x) in a.iter().enumerate() {
                if is_flat(x) {
                    let _ = writeln!(s, "{pad}- {}", inline(x));
                } else {
                    let _ = writeln!(s, "{pad}[{i}]");
                    human(x, depth + 1, s);
                }
            }
        }
        other => {
            let _ = writeln!(s, "{pad}{}", inline(other));
        }
    }
}

fn inline(v: &Value) -> String {
    match v {
        Value::Array(a) => format!("[{}]", a.iter().map(scalar).collect::<Vec<_>>().join(", ")),
        other => scalar(other),
    }
}

fn human_table(t: &Value, depth: usize, s: &mut String) {
    let pad = "  ".repeat(depth);
    let cols: Vec<String> = t["columns"].as_array().into_iter().flatten().map(scalar).collect();
    let rows: Vec<Vec<String>> =
        t["rows"].as_array().into_iter().flatten().map(|r| r.as_array().into_iter().flatten().map(scalar).collect()).collect();
    let mut width: Vec<usize> = cols.iter().map(String::len).collect();
    for r in &rows {
        for (i, c) in r.iter().enumerate() {
            if i < width.len() {
                width[i] = width[i].max(c.len());
            }
        }
    }
    let line = |cells: &[String]| {
        cells.iter().zip(&width).map(|(c, w)| format!("{c:<w$}")).collect::<Vec<_>>().join("  ").trim_end().to_string()
    };
    let _ = writeln!(s, "{pad}{}", line(&cols));
    for r in &rows {
        let _ = writeln!(s, "{pad}{}", line(r));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn timing_moves_to_the_top() {
        let v = isolate_timing(json!({"a": 1, "stats": {"nodes": 3, "elapsed_ms": 2.5}, "report": {"timing": {"x_ms": 1.0}}}));
        assert_eq!(v["stats"], json!({"nodes": 3}));
        assert_eq!(v["timing"]["stats.elapsed_ms"], json!(2.5));
        assert_eq!(v["timing"]["report.timing.x_ms"], json!(1.0));
        assert!(v["report"].as_object().unwrap().is_empty());
    }

    #[test]
    fn tables_render_as_csv() {
        let v = json!({"table": {"columns": ["a", "b"], "rows": [[1, "x,y"]]}});
        assert_eq!(render(&v, Format::Csv), "a,b\n1,\"x,y\"\n");
    }
}
