use std::io::Write;

use serde::Serialize;
use serde_json::Value;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Serialize)]
pub struct Timing {
    pub elapsed_ms: f64,
}

#[derive(Debug, Serialize)]
pub struct ErrorRecord {
    pub exit_code: i32,
    pub kind: String,
    pub message: String,
}

/// One report document per invocation.
#[derive(Debug, Serialize)]
pub struct Envelope {
    pub schema_version: u32,
    pub command: String,
    pub inputs: Value,
    pub results: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorRecord>,
    pub timing: Option<Timing>,
    pub library_version: &'static str,
}

/// Rows for `--format csv`.
#[derive(Debug, Default)]
pub struct Table {
    pub headers: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(headers: &[&'static str]) -> Self {
        Table { headers: headers.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }
}

pub fn write_json(out: &mut impl Write, env: &Envelope) -> std::io::Result<()> {
    serde_json::to_writer_pretty(&mut *out, env)?;
    writeln!(out)
}

pub fn write_csv(out: &mut impl Write, table: &Table) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(&table.headers)?;
    for row in &table.rows {
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

/// `key,value` rows of the leaves of `v`, keys joined with `.`.
pub fn flatten(v: &Value) -> Table {
    let mut t = Table::new(&["key", "value"]);
    walk(v, String::new(), &mut t);
    t
}

fn walk(v: &Value, path: String, t: &mut Table) {
    let join = |k: &str| if path.is_empty() { k.to_string() } else { format!("{path}.{k}") };
    match v {
        Value::Object(m) => m.iter().for_each(|(k, x)| walk(x, join(k), t)),
        Value::Array(a) if !a.is_empty() => a.iter().enumerate().for_each(|(i, x)| walk(x, join(&i.to_string()), t)),
        Value::String(s) => t.push(vec![path, s.clone()]),
        other => t.push(vec![path, other.to_string()]),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn flatten_leaves() {
        let t = flatten(&json!({"b": [1, {"c": "x"}], "a": null, "e": []}));
        let rows: Vec<String> = t.rows.iter().map(|r| r.join("=")).collect();
        assert_eq!(rows, ["a=null", "b.0=1", "b.1.c=x", "e=[]"]);
    }

    #[test]
    fn envelope_key_order() {
        let env = Envelope {
            schema_version: SCHEMA_VERSION,
            command: "phi".into(),
            inputs: json!({"v": 1, "u": 2}),
            results: json!({"value": "3"}),
            error: None,
            timing: None,
            library_version: "0",
        };
        let mut buf = Vec::new();
        write_json(&mut buf, &env).unwrap();
        let s = String::from_utf8(buf).unwrap();
        let pos = |k: &str| s.find(&format!("\"{k}\"")).unwrap();
        assert!(pos("schema_version") < pos("command") && pos("results") < pos("timing"));
        assert!(pos("u") < pos("v"));
        assert!(s.contains("\"timing\": null"));
    }
}
