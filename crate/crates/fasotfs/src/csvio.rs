//! CSV files with a `#`-prefixed metadata header.
//!
//! ```text
//! # fasotfs: 0.1.0
//! # experiment: fig_n
//! # config_digest: 3f2a...
//! param_name,param_value,method,value,error_estimate,seed
//! N,1,envelope_indep,6.2e-2,0e0,7
//! ```

use crate::error::{io_err, Error, Result};
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::Path;

pub const DIGEST_KEY: &str = "config_digest";
pub const EXPERIMENT_KEY: &str = "experiment";

/// One sweep record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub param_name: String,
    pub param_value: f64,
    pub method: String,
    pub value: f64,
    pub error_estimate: f64,
    pub seed: u64,
}

/// Metadata plus sweep rows.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub metadata: Vec<(String, String)>,
    pub rows: Vec<Row>,
}

impl Table {
    pub fn meta(&self, key: &str) -> Option<&str> {
        self.metadata.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn push_meta(&mut self, key: impl Into<String>, value: impl ToString) {
        self.metadata.push((key.into(), value.to_string()));
    }

    /// Rows of one method in file order.
    pub fn method<'a>(&'a self, method: &'a str) -> impl Iterator<Item = &'a Row> + 'a {
        self.rows.iter().filter(move |r| r.method == method)
    }
}

pub(crate) fn header_bytes(metadata: &[(String, String)]) -> Vec<u8> {
    let mut out = Vec::new();
    for (k, v) in metadata {
        // Values are single-line by construction; keep it that way.
        let v = v.replace(['\n', '\r'], " ");
        writeln!(out, "# {k}: {v}").expect("write to Vec");
    }
    out
}

/// Writes `bytes` to a temporary file next to `path` and renames it into
/// place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err(dir))?;
    tmp.write_all(bytes).map_err(io_err(tmp.path()))?;
    tmp.as_file().sync_all().map_err(io_err(tmp.path()))?;
    tmp.persist(path).map_err(|e| Error::Io { path: path.into(), source: e.error })?;
    Ok(())
}

/// Serializes a table. Values use the shortest round-trip exponent form so
/// the output is a pure function of the numbers.
pub fn to_bytes(table: &Table) -> Result<Vec<u8>> {
    let mut out = header_bytes(&table.metadata);
    let mut w = csv::Writer::from_writer(&mut out);
    w.write_record(["param_name", "param_value", "method", "value", "error_estimate", "seed"])?;
    for r in &table.rows {
        w.write_record([
            r.param_name.clone(),
            r.param_value.to_string(),
            r.method.clone(),
            format!("{:e}", r.value),
            format!("{:e}", r.error_estimate),
            r.seed.to_string(),
        ])?;
    }
    w.flush().map_err(io_err("<buffer>"))?;
    drop(w);
    Ok(out)
}

pub fn write_table(path: &Path, table: &Table) -> Result<()> {
    write_atomic(path, &to_bytes(table)?)
}

pub fn parse_table(text: &str, path: &Path) -> Result<Table> {
    let mut metadata = Vec::new();
    let mut body = String::new();
    for line in text.lines() {
        if let Some(rest) = line.strip_prefix('#') {
            let (k, v) = rest.trim().split_once(':').ok_or_else(|| Error::Format {
                path: path.into(),
                msg: format!("metadata line without 'key: value': {line:?}"),
            })?;
            metadata.push((k.trim().to_string(), v.trim().to_string()));
        } else {
            body.push_str(line);
            body.push('\n');
        }
    }
    let mut rdr = csv::Reader::from_reader(body.as_bytes());
    let rows = rdr.deserialize().collect::<std::result::Result<Vec<Row>, _>>()?;
    Ok(Table { metadata, rows })
}

pub fn read_table(path: &Path) -> Result<Table> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    parse_table(&text, path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let mut t = Table::default();
        t.push_meta(EXPERIMENT_KEY, "demo");
        t.push_meta(DIGEST_KEY, "abc");
        for (i, v) in [0.1, 1e-300, 0.0, 1.0 / 3.0].into_iter().enumerate() {
            t.rows.push(Row {
                param_name: "W".into(),
                param_value: 0.25 * (i + 1) as f64,
                method: "mc".into(),
                value: v,
                error_estimate: v * 1e-3,
                seed: 5,
            });
        }
        let bytes = to_bytes(&t).unwrap();
        let text = String::from_utf8(bytes).unwrap();
        assert!(text.starts_with("# experiment: demo\n# config_digest: abc\nparam_name,"));
        let back = parse_table(&text, Path::new("x")).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("sub/out.csv");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(std::fs::read(&p).unwrap(), b"two");
        assert_eq!(std::fs::read_dir(p.parent().unwrap()).unwrap().count(), 1);
    }
}
