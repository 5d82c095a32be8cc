//! Plain-text rendering of a JSON result.

use serde_json::Value;

use ks_selfsim::export::fmt_sig;

fn scalar(v: &Value) -> String {
    match v {
        Value::Number(n) => n.as_f64().map(fmt_sig).unwrap_or_else(|| n.to_string()),
        Value::String(s) => s.clone(),
        Value::Null => "-".into(),
        other => other.to_string(),
    }
}

fn is_scalar(v: &Value) -> bool {
    !matches!(v, Value::Object(_) | Value::Array(_))
        || matches!(v, Value::Array(a) if a.iter().all(|x| !x.is_object()))
}

/// Scalars as `key  value` lines, arrays of objects as column tables,
/// nested objects under a dotted prefix.
pub fn render(v: &Value) -> String {
    let mut out = String::new();
    walk("", v, &mut out);
    out
}

fn walk(prefix: &str, v: &Value, out: &mut String) {
    let Value::Object(map) = v else {
        out.push_str(&format!("{prefix}  {}\n", scalar(v)));
        return;
    };
    let key = |k: &str| {
        if prefix.is_empty() {
            k.to_string()
        } else {
            format!("{prefix}.{k}")
        }
    };
    let width = map.keys().map(|k| key(k).len()).max().unwrap_or(0);
    for (k, x) in map.iter().filter(|(_, x)| is_scalar(x)) {
        out.push_str(&format!("{:<width$}  {}\n", key(k), scalar(x)));
    }
    for (k, x) in map.iter().filter(|(_, x)| !is_scalar(x)) {
        match x {
            Value::Object(_) => walk(&key(k), x, out),
            Value::Array(rows) => rows_table(&key(k), rows, out),
            _ => unreachable!(),
        }
    }
}

fn rows_table(title: &str, rows: &[Value], out: &mut String) {
    out.push_str(&format!("\n{title} ({} rows)\n", rows.len()));
    let Some(Value::Object(first)) = rows.first() else {
        return;
    };
    let cols: Vec<&String> = first.keys().collect();
    let cells: Vec<Vec<String>> = rows
        .iter()
        .map(|r| cols.iter().map(|c| scalar(&r[c.as_str()])).collect())
        .collect();
    let widths: Vec<usize> = cols
        .iter()
        .enumerate()
        .map(|(i, c)| {
            cells
                .iter()
                .map(|r| r[i].len())
                .chain([c.len()])
                .max()
                .unwrap_or(0)
        })
        .collect();
    let line = |items: Vec<&str>| {
        items
            .iter()
            .zip(&widths)
            .map(|(s, w)| format!("{s:>w$}"))
            .collect::<Vec<_>>()
            .join("  ")
    };
    out.push_str(&line(cols.iter().map(|c| c.as_str()).collect()));
    out.push('\n');
    for r in &cells {
        out.push_str(&line(r.iter().map(|s| s.as_str()).collect()));
        out.push('\n');
    }
}
