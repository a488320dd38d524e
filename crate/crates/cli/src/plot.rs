//! Curve tables written as CSV.

use std::fs::OpenOptions;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PlotError {
    #[error("no curve data to write")]
    Empty,
    #[error("row {row} has {got} cells, header has {want}")]
    Ragged { row: usize, got: usize, want: usize },
    #[error("{0} exists; pass --overwrite to replace it")]
    Exists(String),
    #[error("cannot write {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

/// Full-precision decimal: 17 significant digits, exact on round trip.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Header plus preformatted rows.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self { columns: columns.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push_numbers(&mut self, values: &[f64]) {
        self.rows.push(values.iter().copied().map(num).collect());
    }

    pub fn push(&mut self, cells: Vec<String>) {
        self.rows.push(cells);
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Values of a numeric column.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        self.rows.iter().map(|r| r[i].parse().ok()).collect()
    }

    pub fn to_csv(&self) -> Result<String, PlotError> {
        if self.columns.is_empty() || self.rows.is_empty() {
            return Err(PlotError::Empty);
        }
        let mut out = self.columns.join(",");
        out.push('\n');
        for (i, row) in self.rows.iter().enumerate() {
            if row.len() != self.columns.len() {
                return Err(PlotError::Ragged { row: i, got: row.len(), want: self.columns.len() });
            }
            out.push_str(&row.join(","));
            out.push('\n');
        }
        Ok(out)
    }
}

/// Writes `table` to `path`; an existing file is only replaced when
/// `overwrite` is set.
pub fn emit_plot_data(table: &Table, path: &Path, overwrite: bool) -> Result<(), PlotError> {
    let text = table.to_csv()?;
    write_new(path, text.as_bytes(), overwrite)
}

pub(crate) fn write_new(path: &Path, bytes: &[u8], overwrite: bool) -> Result<(), PlotError> {
    let mut opts = OpenOptions::new();
    opts.write(true);
    if overwrite {
        opts.create(true).truncate(true);
    } else {
        opts.create_new(true);
    }
    let io = |source| PlotError::Io { path: path.display().to_string(), source };
    let mut f = opts.open(path).map_err(|e| {
        if e.kind() == std::io::ErrorKind::AlreadyExists {
            PlotError::Exists(path.display().to_string())
        } else {
            io(e)
        }
    })?;
    f.write_all(bytes).map_err(io)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, f64::MIN_POSITIVE] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn empty_table_is_an_error() {
        let t = Table::new(["t", "r"]);
        assert!(matches!(t.to_csv(), Err(PlotError::Empty)));
    }

    #[test]
    fn ragged_rows_are_rejected() {
        let mut t = Table::new(["a", "b"]);
        t.push(vec!["1".into()]);
        assert!(matches!(t.to_csv(), Err(PlotError::Ragged { .. })));
    }

    #[test]
    fn column_extraction() {
        let mut t = Table::new(["t", "r"]);
        t.push_numbers(&[0.0, 2.0]);
        t.push_numbers(&[1.0, 3.5]);
        assert_eq!(t.column("r").unwrap(), vec![2.0, 3.5]);
        assert!(t.column("x").is_none());
    }
}
