//! Rectangular result tables with deterministic text formatting, shared by
//! the sweep drivers and the CLI's CSV emitters.

use crate::error::{Error, Result};
use std::fmt;

/// One table cell. Floats print with 17 significant digits so that equal
/// numbers always serialize to equal bytes.
#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Int(i64),
    Num(f64),
    Text(String),
}

impl fmt::Display for Cell {
    fn fmt(&self, fm: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Int(v) => write!(fm, "{v}"),
            Cell::Num(v) => write!(fm, "{v:.16e}"),
            Cell::Text(s) => write!(fm, "{s}"),
        }
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Cell {
        Cell::Int(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Cell {
        Cell::Int(v as i64)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Cell {
        Cell::Num(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Cell {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Cell {
        Cell::Text(v)
    }
}

/// An ordered schema plus rows, with free-form metadata entries that callers
/// may attach (the CLI records them in a sidecar, not in the CSV body).
#[derive(Clone, Debug)]
pub struct ResultTable {
    schema: Vec<String>,
    rows: Vec<Vec<Cell>>,
    metadata: Vec<(String, String)>,
}

impl ResultTable {
    pub fn new(schema: &[&str]) -> ResultTable {
        ResultTable {
            schema: schema.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
            metadata: Vec::new(),
        }
    }

    pub fn schema(&self) -> &[String] {
        &self.schema
    }

    pub fn rows(&self) -> &[Vec<Cell>] {
        &self.rows
    }

    pub fn metadata(&self) -> &[(String, String)] {
        &self.metadata
    }

    pub fn add_metadata(&mut self, key: &str, value: &str) {
        self.metadata.push((key.to_string(), value.to_string()));
    }

    pub fn push_row(&mut self, row: Vec<Cell>) -> Result<()> {
        if row.len() != self.schema.len() {
            return Err(Error::ShapeMismatch {
                context: "table row width",
                expected: self.schema.len(),
                got: row.len(),
            });
        }
        for cell in &row {
            if let Cell::Text(s) = cell {
                if s.contains(',') || s.contains('\n') {
                    return Err(Error::domain(format!(
                        "table text cell {s:?} would corrupt the CSV layout"
                    )));
                }
            }
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    /// Header line plus one line per row, comma-separated, trailing newline.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.schema.join(","));
        out.push('\n');
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(|c| c.to_string()).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formatting_is_stable() {
        let mut t = ResultTable::new(&["L", "tau", "axis", "value"]);
        t.push_row(vec![8usize.into(), 0.5.into(), "z".into(), (-0.25).into()])
            .unwrap();
        let csv = t.to_csv();
        assert_eq!(
            csv,
            "L,tau,axis,value\n8,5.0000000000000000e-1,z,-2.5000000000000000e-1\n"
        );
        // identical content yields identical bytes
        let mut t2 = ResultTable::new(&["L", "tau", "axis", "value"]);
        t2.push_row(vec![8usize.into(), 0.5.into(), "z".into(), (-0.25).into()])
            .unwrap();
        assert_eq!(csv, t2.to_csv());
    }

    #[test]
    fn row_width_checked() {
        let mut t = ResultTable::new(&["a", "b"]);
        assert!(t.push_row(vec![1.0.into()]).is_err());
    }

    #[test]
    fn commas_in_text_rejected() {
        let mut t = ResultTable::new(&["region"]);
        assert!(t.push_row(vec!["1,2".into()]).is_err());
        assert!(t.push_row(vec!["1:2+5:6".into()]).is_ok());
    }

    #[test]
    fn seventeen_significant_digits_round_trip() {
        // 17 significant digits reproduce any f64 exactly
        let v = std::f64::consts::PI / 3.0;
        let s = format!("{v:.16e}");
        let back: f64 = s.parse().unwrap();
        assert_eq!(v, back);
    }
}
