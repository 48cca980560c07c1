//! CSV table plus JSON sidecar describing how it was produced.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Bool(bool),
    Text(String),
    Empty,
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(x) => render_f64(*x),
            Cell::Int(n) => n.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Empty, Cell::Num)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Bool(b)
    }
}

/// Shortest round-trip decimal; exponent form outside [1e-5, 1e16). Both
/// zeros print as `0`.
pub fn render_f64(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 {
        "0".to_string()
    } else if !a.is_finite() || (1e-5..1e16).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// A hypothesis or data problem, with the rows it applies to.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Flag {
    pub code: String,
    pub message: String,
    /// Zero-based row indices; empty when the flag concerns the whole run.
    pub rows: Vec<usize>,
}

#[derive(Debug, Serialize)]
struct Sidecar<'a> {
    version: u32,
    tool_version: &'static str,
    command: &'a str,
    argv: &'a [String],
    params: &'a BTreeMap<String, Value>,
    flags: &'a [Flag],
    columns: &'a [String],
    row_count: usize,
    rows_digest: String,
    tolerances: &'a BTreeMap<String, f64>,
    summary: &'a BTreeMap<String, Value>,
}

#[derive(Debug)]
pub struct RunReport {
    pub command: String,
    pub argv: Vec<String>,
    pub params: BTreeMap<String, Value>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    pub flags: Vec<Flag>,
    pub tolerances: BTreeMap<String, f64>,
    /// Run-level results that are not per-row, such as fitted slopes.
    pub summary: BTreeMap<String, Value>,
}

impl RunReport {
    pub fn new(command: &str, columns: &[&str]) -> Self {
        Self {
            command: command.to_string(),
            argv: std::env::args().collect(),
            params: BTreeMap::new(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            flags: Vec::new(),
            tolerances: BTreeMap::new(),
            summary: BTreeMap::new(),
        }
    }

    pub fn param(&mut self, name: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).expect("parameters serialize");
        self.params.insert(name.to_string(), v);
    }

    pub fn tolerance(&mut self, name: &str, value: f64) {
        self.tolerances.insert(name.to_string(), value);
    }

    pub fn push_row(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }

    /// Records `message` against `row`, merging with an identical earlier flag.
    pub fn flag(&mut self, code: &str, message: impl Into<String>, row: Option<usize>) {
        let message = message.into();
        let existing = self
            .flags
            .iter_mut()
            .find(|f| f.code == code && f.message == message);
        let f = match existing {
            Some(f) => f,
            None => {
                self.flags.push(Flag {
                    code: code.to_string(),
                    message,
                    rows: Vec::new(),
                });
                self.flags.last_mut().unwrap()
            }
        };
        if let Some(r) = row {
            f.rows.push(r);
        }
    }

    pub fn csv_bytes(&self) -> Result<Vec<u8>, CliError> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::CRLF)
            .from_writer(Vec::new());
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render))?;
        }
        w.into_inner()
            .map_err(|e| CliError::io("<csv buffer>", e.into_error()))
    }

    pub fn sidecar_json(&self, csv: &[u8]) -> Result<String, CliError> {
        let digest = Sha256::digest(csv);
        let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
        let sidecar = Sidecar {
            version: SCHEMA_VERSION,
            tool_version: env!("CARGO_PKG_VERSION"),
            command: &self.command,
            argv: &self.argv,
            params: &self.params,
            flags: &self.flags,
            columns: &self.columns,
            row_count: self.rows.len(),
            rows_digest: format!("sha256:{hex}"),
            tolerances: &self.tolerances,
            summary: &self.summary,
        };
        let mut s = serde_json::to_string_pretty(&sidecar)?;
        s.push('\n');
        Ok(s)
    }

    /// Writes the CSV to `out` (stdout when absent) and the sidecar to
    /// `json`, which defaults to `<out>.json` when `out` is a file.
    pub fn emit(&self, out: Option<&Path>, json: Option<&Path>) -> Result<(), CliError> {
        let csv = self.csv_bytes()?;
        match out {
            Some(p) => std::fs::write(p, &csv).map_err(|e| CliError::io(p, e))?,
            None => std::io::stdout()
                .write_all(&csv)
                .map_err(|e| CliError::io("<stdout>", e))?,
        }
        let json_path: Option<PathBuf> = match (json, out) {
            (Some(j), _) => Some(j.to_path_buf()),
            (None, Some(o)) => {
                let mut s = o.as_os_str().to_owned();
                s.push(".json");
                Some(PathBuf::from(s))
            }
            (None, None) => None,
        };
        if let Some(j) = json_path {
            std::fs::write(&j, self.sidecar_json(&csv)?).map_err(|e| CliError::io(&j, e))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> RunReport {
        let mut r = RunReport::new("test", &["lambda", "value", "note"]);
        r.argv = vec!["x".into()];
        r.push_row(vec![Cell::Num(0.1), Cell::Num(1e-20), Cell::Text("a,b".into())]);
        r.push_row(vec![Cell::Num(2.0), Cell::Empty, Cell::Bool(true)]);
        r
    }

    #[test]
    fn csv_is_rfc4180_with_round_trip_numbers() {
        let csv = String::from_utf8(sample().csv_bytes().unwrap()).unwrap();
        assert_eq!(csv, "lambda,value,note\r\n0.1,1e-20,\"a,b\"\r\n2,,true\r\n");
    }

    #[test]
    fn numbers_round_trip() {
        assert_eq!(render_f64(-0.0), "0");
        for x in [0.0, 1.0, 0.1, 1e-5, 9.99e-6, 1e16, 123456.789, 6.02e23, -3.5e-300, f64::MAX] {
            let s = render_f64(x);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits(), "{s}");
        }
        assert_eq!(render_f64(2.5e20), "2.5e20");
        assert_eq!(render_f64(f64::INFINITY), "inf");
    }

    #[test]
    fn flags_merge_by_message() {
        let mut r = sample();
        r.flag("hypothesis", "sigma < 3/2", Some(0));
        r.flag("hypothesis", "sigma < 3/2", Some(1));
        r.flag("hypothesis", "other", None);
        assert_eq!(r.flags.len(), 2);
        assert_eq!(r.flags[0].rows, vec![0, 1]);
        assert!(r.flags[1].rows.is_empty());
    }

    #[test]
    fn digest_tracks_csv_bytes() {
        let r = sample();
        let csv = r.csv_bytes().unwrap();
        let a: Value = serde_json::from_str(&r.sidecar_json(&csv).unwrap()).unwrap();
        let b: Value = serde_json::from_str(&r.sidecar_json(b"other").unwrap()).unwrap();
        assert_ne!(a["rows_digest"], b["rows_digest"]);
        assert_eq!(a["row_count"], 2);
        assert!(a["rows_digest"].as_str().unwrap().starts_with("sha256:"));
    }
}
