//! Result tables and their CSV / JSON serialization.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use super::config::{Format, RunConfig};
use crate::error::{Error, Result};

pub const VERSION: &str = concat!("sso-core ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    pub unit: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub subcommand: String,
    /// SHA-256 of the canonical configuration.
    pub config_hash: String,
    pub version: String,
    /// `SOURCE_DATE_EPOCH` when set, otherwise `unset`, so reruns are byte-identical.
    pub timestamp: String,
}

impl Provenance {
    pub fn new(cfg: &RunConfig, subcommand: &str) -> Self {
        Provenance {
            subcommand: subcommand.to_string(),
            config_hash: config_hash(cfg),
            version: VERSION.to_string(),
            timestamp: std::env::var("SOURCE_DATE_EPOCH").unwrap_or_else(|_| "unset".to_string()),
        }
    }
}

pub fn config_hash(cfg: &RunConfig) -> String {
    hex::encode(Sha256::digest(cfg.canonical().as_bytes()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultTable {
    pub name: String,
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<f64>>,
    pub provenance: Provenance,
}

impl ResultTable {
    /// `columns` are `(name, unit)` pairs.
    pub fn new(name: impl Into<String>, columns: &[(&str, &str)], provenance: Provenance) -> Self {
        ResultTable {
            name: name.into(),
            columns: columns
                .iter()
                .map(|(n, u)| Column {
                    name: n.to_string(),
                    unit: u.to_string(),
                })
                .collect(),
            rows: Vec::new(),
            provenance,
        }
    }

    pub fn push(&mut self, row: Vec<f64>) -> Result<()> {
        if row.len() != self.columns.len() {
            return Err(Error::precondition(format!(
                "table {} has {} columns but the row has {} values",
                self.name,
                self.columns.len(),
                row.len()
            )));
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn column_names(&self) -> Vec<&str> {
        self.columns.iter().map(|c| c.name.as_str()).collect()
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.columns.iter().position(|c| c.name == name)?;
        Some(self.rows.iter().map(|r| r[idx]).collect())
    }
}

fn check_precision(precision: usize) -> Result<()> {
    if !(6..=17).contains(&precision) {
        return Err(Error::config(format!("precision must lie in [6, 17], got {precision}")));
    }
    Ok(())
}

/// Scientific notation with `precision` significant digits.
pub fn format_float(x: f64, precision: usize) -> String {
    if x.is_nan() {
        "NaN".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{:.*e}", precision - 1, x)
    }
}

pub fn render_csv(table: &ResultTable, precision: usize) -> Result<String> {
    check_precision(precision)?;
    let mut out = table.column_names().join(",");
    out.push('\n');
    for row in &table.rows {
        let cells: Vec<String> = row.iter().map(|&x| format_float(x, precision)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    Ok(out)
}

fn rounded(x: f64, precision: usize) -> Value {
    if x.is_finite() {
        let r: f64 = format_float(x, precision).parse().expect("formatted float parses");
        json!(r)
    } else {
        Value::Null
    }
}

pub fn render_json(table: &ResultTable, precision: usize) -> Result<String> {
    check_precision(precision)?;
    let rows: Vec<Value> = table
        .rows
        .iter()
        .map(|r| Value::Array(r.iter().map(|&x| rounded(x, precision)).collect()))
        .collect();
    let doc = json!({
        "name": table.name,
        "schema": table.columns,
        "provenance": table.provenance,
        "rows": rows,
    });
    let mut text = serde_json::to_string_pretty(&doc).expect("table serializes");
    text.push('\n');
    Ok(text)
}

pub fn render(table: &ResultTable, format: Format, precision: usize) -> Result<String> {
    match format {
        Format::Csv => render_csv(table, precision),
        Format::Json => render_json(table, precision),
    }
}

/// Serializes one table to `sink`.
pub fn write_table(table: &ResultTable, format: Format, precision: usize, sink: &mut impl Write) -> Result<()> {
    let text = render(table, format, precision)?;
    sink.write_all(text.as_bytes())?;
    sink.flush()?;
    Ok(())
}

/// Writes every table of one subcommand into `dir`, or none of them.
///
/// All files are rendered and written under temporary names first and only
/// renamed once every write succeeded. CSV output gets a
/// `<subcommand>.provenance.json` sidecar since CSV has no header block.
pub fn write_tables(dir: &Path, tables: &[ResultTable], format: Format, precision: usize) -> Result<Vec<PathBuf>> {
    let mut files: Vec<(String, String)> = Vec::with_capacity(tables.len() + 1);
    for t in tables {
        files.push((format!("{}.{}", t.name, format.extension()), render(t, format, precision)?));
    }
    if format == Format::Csv {
        if let Some(first) = tables.first() {
            let doc = json!({
                "provenance": first.provenance,
                "tables": tables
                    .iter()
                    .map(|t| json!({ "name": t.name, "schema": t.columns, "rows": t.rows.len() }))
                    .collect::<Vec<_>>(),
            });
            let mut text = serde_json::to_string_pretty(&doc).expect("provenance serializes");
            text.push('\n');
            files.push((format!("{}.provenance.json", first.provenance.subcommand), text));
        }
    }

    fs::create_dir_all(dir)?;
    let mut staged: Vec<(PathBuf, PathBuf)> = Vec::with_capacity(files.len());
    let outcome = (|| -> Result<()> {
        for (name, text) in &files {
            let tmp = dir.join(format!(".{name}.tmp"));
            staged.push((tmp.clone(), dir.join(name)));
            let mut f = fs::File::create(&tmp)?;
            f.write_all(text.as_bytes())?;
            f.sync_all()?;
        }
        Ok(())
    })();
    if let Err(e) = outcome {
        for (tmp, _) in &staged {
            let _ = fs::remove_file(tmp);
        }
        return Err(e);
    }
    let mut written = Vec::with_capacity(staged.len());
    for (tmp, dest) in staged {
        fs::rename(&tmp, &dest)?;
        written.push(dest);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table() -> ResultTable {
        let cfg = RunConfig::default();
        let mut t = ResultTable::new("demo", &[("n", "1"), ("energy", "energy")], Provenance::new(&cfg, "spectrum"));
        t.push(vec![0.0, 0.1]).unwrap();
        t.push(vec![1.0, f64::NAN]).unwrap();
        t
    }

    #[test]
    fn csv_layout() {
        let text = render_csv(&table(), 6).unwrap();
        assert_eq!(text, "n,energy\n0.00000e0,1.00000e-1\n1.00000e0,NaN\n");
    }

    #[test]
    fn empty_table_is_header_only() {
        let cfg = RunConfig::default();
        let t = ResultTable::new("empty", &[("a", "1"), ("b", "1")], Provenance::new(&cfg, "x"));
        assert_eq!(render_csv(&t, 17).unwrap(), "a,b\n");
    }

    #[test]
    fn ragged_rows_are_rejected() {
        assert!(table().push(vec![1.0]).is_err());
    }

    #[test]
    fn json_has_schema_provenance_rows() {
        let v: Value = serde_json::from_str(&render_json(&table(), 17).unwrap()).unwrap();
        assert_eq!(v["schema"][1]["name"], "energy");
        assert_eq!(v["rows"][0][1], 0.1);
        assert!(v["rows"][1][1].is_null());
        assert_eq!(v["provenance"]["version"], VERSION);
    }

    #[test]
    fn bad_precision() {
        assert!(render_csv(&table(), 5).is_err());
        assert!(render_json(&table(), 18).is_err());
    }

    #[test]
    fn same_config_same_hash() {
        let a = RunConfig::default();
        let b = RunConfig::default();
        assert_eq!(config_hash(&a), config_hash(&b));
        let mut c = RunConfig::default();
        c.potential.alpha = 2.0;
        assert_ne!(config_hash(&a), config_hash(&c));
    }

    #[test]
    fn unwritable_directory_writes_nothing() {
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("file");
        fs::write(&blocker, "x").unwrap();
        let err = write_tables(&blocker.join("sub"), &[table()], Format::Csv, 17).unwrap_err();
        assert_eq!(err.exit_code(), 4);
    }
}
