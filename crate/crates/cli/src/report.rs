//! Report envelope and its JSON and CSV renderings.

use serde::Serialize;
use serde_json::{Map, Value};
use std::io::{self, Write};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub command: String,
    pub config: Value,
    pub results: Vec<Value>,
    pub timing: Value,
    pub version: &'static str,
}

impl Report {
    /// Wall-clock fields are moved out of `results` into `timing` so the
    /// rest of the report is reproducible.
    pub fn new(command: String, config: Value, mut results: Vec<Value>, seconds: f64) -> Self {
        let mut per_result = Vec::new();
        for r in &mut results {
            let mut found = Vec::new();
            strip_wall_time(r, &mut found);
            per_result.push(found.into_iter().sum::<f64>());
        }
        let mut timing = Map::new();
        timing.insert("total_seconds".into(), seconds.into());
        if per_result.iter().any(|&t| t > 0.0) {
            timing.insert("result_seconds".into(), per_result.into());
        }
        Report { command, config, results, timing: Value::Object(timing), version: env!("CARGO_PKG_VERSION") }
    }

    pub fn write(&self, format: Format, out: &mut dyn Write) -> io::Result<()> {
        match format {
            Format::Json => {
                serde_json::to_writer_pretty(&mut *out, self)?;
                writeln!(out)
            }
            Format::Csv => write_csv(&self.results, out),
        }
    }
}

fn strip_wall_time(v: &mut Value, found: &mut Vec<f64>) {
    match v {
        Value::Object(m) => {
            if let Some(t) = m.remove("wall_time") {
                found.push(t.as_f64().unwrap_or(0.0));
            }
            m.values_mut().for_each(|x| strip_wall_time(x, found));
        }
        Value::Array(a) => a.iter_mut().for_each(|x| strip_wall_time(x, found)),
        _ => {}
    }
}

/// Flatten one result into (column, cell) pairs. Complex numbers serialize
/// as two-element numeric arrays and become `_re`/`_im` columns; other
/// arrays are indexed.
pub fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    let join = |k: &str| if prefix.is_empty() { k.to_owned() } else { format!("{prefix}.{k}") };
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                flatten(&join(k), x, out);
            }
        }
        Value::Array(a) if a.len() == 2 && a.iter().all(Value::is_number) => {
            out.push((format!("{prefix}_re"), a[0].to_string()));
            out.push((format!("{prefix}_im"), a[1].to_string()));
        }
        Value::Array(a) => {
            for (i, x) in a.iter().enumerate() {
                flatten(&join(&i.to_string()), x, out);
            }
        }
        Value::Null => out.push((prefix.to_owned(), String::new())),
        Value::String(s) => out.push((prefix.to_owned(), s.clone())),
        other => out.push((prefix.to_owned(), other.to_string())),
    }
}

/// One header row; columns are the union over rows in first-seen order.
pub fn write_csv(results: &[Value], out: &mut dyn Write) -> io::Result<()> {
    let rows: Vec<Vec<(String, String)>> = results
        .iter()
        .map(|r| {
            let mut cells = Vec::new();
            flatten("", r, &mut cells);
            cells
        })
        .collect();
    let mut header: Vec<&str> = Vec::new();
    for row in &rows {
        for (k, _) in row {
            if !header.contains(&k.as_str()) {
                header.push(k);
            }
        }
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(&header)?;
    for row in &rows {
        w.write_record(header.iter().map(|h| row.iter().find(|(k, _)| k == h).map_or("", |(_, v)| v.as_str())))?;
    }
    w.flush()
}
