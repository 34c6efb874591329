//! CSV tables and JSON documents.
//!
//! Floats print in their shortest round-trip form, so identical inputs give
//! identical bytes.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::{LabError, Result};

/// Column names plus pre-formatted cells.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Table {
    pub columns: Vec<String>,
    #[serde(skip)]
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.into_inner().map_err(|e| LabError::Usage(e.to_string()))
    }
}

/// Shortest round-trip text for a float.
pub fn real(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else if x.is_infinite() {
        if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{x}")
    }
}

/// Builds a row from displayable cells.
#[macro_export]
macro_rules! row {
    ($($cell:expr),* $(,)?) => {
        vec![$($crate::output::Cell::cell(&$cell)),*]
    };
}

pub trait Cell {
    fn cell(&self) -> String;
}

impl Cell for f64 {
    fn cell(&self) -> String {
        real(*self)
    }
}

macro_rules! display_cell {
    ($($t:ty),*) => {$(
        impl Cell for $t {
            fn cell(&self) -> String {
                self.to_string()
            }
        }
    )*};
}

display_cell!(u8, u32, u64, i64, i128, u128, usize, bool, String, &str);

pub fn json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut v = serde_json::to_vec_pretty(value)?;
    v.push(b'\n');
    Ok(v)
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir).map_err(|e| LabError::io(dir.display().to_string(), e))?;
        }
    }
    std::fs::write(path, bytes).map_err(|e| LabError::io(path.display().to_string(), e))
}

/// Writes to `path`, or to standard output when it is `None`.
pub fn emit(path: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match path {
        Some(p) => write_file(p, bytes),
        None => std::io::stdout().write_all(bytes).map_err(|e| LabError::io("<stdout>", e)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let mut t = Table::new(&["N", "x"]);
        t.push(row![10u64, 0.5]);
        t.push(row![20u64, f64::NEG_INFINITY]);
        assert_eq!(String::from_utf8(t.to_csv().unwrap()).unwrap(), "N,x\n10,0.5\n20,-inf\n");
        assert_eq!(real(1.0), "1");
        assert_eq!(real(0.1 + 0.2), "0.30000000000000004");
    }
}
