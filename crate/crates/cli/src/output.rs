use serde_json::Value;

use crate::config::Format;
use crate::error::CliError;

const BOUND_COLUMNS: [&str; 6] = ["id", "value", "applicable", "tightness", "dominates", "anchor"];

fn scalar(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    let join = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match v {
        Value::Object(map) => map.iter().for_each(|(k, x)| flatten(&join(k), x, out)),
        Value::Array(items) if items.iter().any(|x| x.is_object() || x.is_array()) => {
            items.iter().enumerate().for_each(|(i, x)| flatten(&join(&i.to_string()), x, out))
        }
        Value::Array(items) => out.push((prefix.to_string(), items.iter().map(scalar).collect::<Vec<_>>().join(" "))),
        other => out.push((prefix.to_string(), scalar(other))),
    }
}

fn bound_rows(doc: &Value) -> Option<Vec<Vec<String>>> {
    let rows = doc.get("bounds")?.as_array()?;
    Some(rows.iter().map(|r| BOUND_COLUMNS.iter().map(|c| r.get(*c).map(scalar).unwrap_or_default()).collect()).collect())
}

fn csv_text(header: &[&str], rows: &[Vec<String>]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| CliError::invalid(e.to_string());
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.write_record(r).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::invalid(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn aligned(rows: &[Vec<String>]) -> String {
    let widths: Vec<usize> = (0..rows.first().map_or(0, Vec::len)).map(|c| rows.iter().map(|r| r[c].chars().count()).max().unwrap_or(0)).collect();
    let mut out = String::new();
    for r in rows {
        let cells: Vec<String> = r.iter().zip(&widths).map(|(s, w)| format!("{s:<w$}")).collect();
        out.push_str(cells.join("  ").trim_end());
        out.push('\n');
    }
    out
}

pub fn render(doc: &Value, format: Format) -> Result<String, CliError> {
    match format {
        Format::Json => Ok(serde_json::to_string_pretty(doc).expect("json values serialize") + "\n"),
        Format::Csv => match bound_rows(doc) {
            Some(rows) => csv_text(&BOUND_COLUMNS, &rows),
            None => {
                let mut pairs = Vec::new();
                flatten("", doc, &mut pairs);
                let rows: Vec<Vec<String>> = pairs.into_iter().map(|(k, v)| vec![k, v]).collect();
                csv_text(&["key", "value"], &rows)
            }
        },
        Format::Table => {
            let mut rest = doc.clone();
            let bounds = bound_rows(doc);
            if let Some(map) = rest.as_object_mut() {
                map.remove("bounds");
            }
            let mut pairs = Vec::new();
            flatten("", &rest, &mut pairs);
            let mut out = aligned(&pairs.into_iter().map(|(k, v)| vec![k, v]).collect::<Vec<_>>());
            if let Some(rows) = bounds {
                out.push('\n');
                let mut all = vec![BOUND_COLUMNS.iter().map(|s| s.to_string()).collect()];
                all.extend(rows);
                out.push_str(&aligned(&all));
            }
            Ok(out)
        }
    }
}
