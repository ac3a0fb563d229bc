//! CSV output: a `#`-prefixed manifest header, a column row, then data rows.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::manifest::ExperimentManifest;
use crate::error::{Error, Result};

/// One CSV field.
#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(u64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as u64)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        match v {
            Some(x) => Cell::Float(x),
            None => Cell::Text("none".into()),
        }
    }
}

/// Formats a float with 17 significant digits, which round-trips every `f64`.
pub fn format_float(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        // `inf`, `-inf`, `NaN`
        format!("{v}")
    }
}

impl Cell {
    fn render(&self, out: &mut String) {
        match self {
            Cell::Float(v) => out.push_str(&format_float(*v)),
            Cell::Int(v) => {
                let _ = write!(out, "{v}");
            }
            Cell::Text(s) => out.push_str(s),
        }
    }
}

/// A table waiting to be written.
#[derive(Clone, Debug, Default)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Table { columns: columns.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// Column row followed by data rows.
    pub fn body(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            for (k, cell) in row.iter().enumerate() {
                if k > 0 {
                    out.push(',');
                }
                cell.render(&mut out);
            }
            out.push('\n');
        }
        out
    }
}

pub fn header(manifest: &ExperimentManifest) -> Result<String> {
    let mut out = String::new();
    for line in manifest.to_key_values()? {
        out.push_str("# ");
        out.push_str(&line);
        out.push('\n');
    }
    Ok(out)
}

/// Writes `table` to `dir/name` with the manifest header and returns the path.
pub fn write_table(dir: &Path, name: &str, manifest: &ExperimentManifest, table: &Table) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    let mut text = header(manifest)?;
    text.push_str(&table.body());
    fs::write(&path, text)?;
    Ok(path)
}

/// Splits an output file into its manifest and its body (column row onwards).
pub fn split_output(text: &str) -> Result<(ExperimentManifest, &str)> {
    let mut lines = Vec::new();
    let mut offset = 0;
    for line in text.split_inclusive('\n') {
        match line.strip_prefix("# ") {
            Some(kv) => lines.push(kv.trim_end().to_string()),
            None => break,
        }
        offset += line.len();
    }
    if lines.is_empty() {
        return Err(Error::Parse("output file has no manifest header".into()));
    }
    Ok((ExperimentManifest::from_key_values(&lines)?, &text[offset..]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::manifest::ExperimentKind;

    #[test]
    fn floats_carry_17_significant_digits() {
        assert_eq!(format_float(0.1), "1.0000000000000001e-1");
        assert_eq!(format_float(-2.0), "-2.0000000000000000e0");
        for v in [0.1, 1.0 / 3.0, 1e-300, 6.02e23, -7.5e-5] {
            assert_eq!(format_float(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(format_float(f64::NAN), "NaN");
    }

    #[test]
    fn header_round_trips() {
        let m = ExperimentManifest::default_for(ExperimentKind::Histogram);
        let mut t = Table::new(&["dt", "count", "note"]);
        t.push(vec![0.01.into(), 3usize.into(), "ok".into()]);
        let text = format!("{}{}", header(&m).unwrap(), t.body());
        let (parsed, body) = split_output(&text).unwrap();
        assert_eq!(parsed, m);
        assert_eq!(body, "dt,count,note\n1.0000000000000000e-2,3,ok\n");
        assert!(text.contains("# verlet_variant = \"drift-kick-drift\"\n"));
    }
}
