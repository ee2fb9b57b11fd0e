//! Column-oriented numeric tables and delimited-text I/O.

use crate::error::{Error, Result};
use std::io::{Read, Write};
use std::path::Path;

/// A numeric table stored column by column.
#[derive(Debug, Clone, PartialEq)]
pub struct DataTable {
    names: Vec<String>,
    columns: Vec<Vec<f64>>,
}

impl DataTable {
    pub fn new(names: Vec<String>, columns: Vec<Vec<f64>>) -> Result<Self> {
        if names.len() != columns.len() {
            return Err(Error::Dimension {
                expected: names.len(),
                got: columns.len(),
            });
        }
        if let Some(first) = columns.first() {
            if let Some(bad) = columns.iter().find(|c| c.len() != first.len()) {
                return Err(Error::Dimension {
                    expected: first.len(),
                    got: bad.len(),
                });
            }
        }
        for (i, a) in names.iter().enumerate() {
            if names[..i].contains(a) {
                return Err(Error::Input(format!("duplicate column name '{a}'")));
            }
        }
        Ok(DataTable { names, columns })
    }

    /// Builds a table from row-major data.
    pub fn from_rows(names: Vec<String>, rows: &[Vec<f64>]) -> Result<Self> {
        let d = names.len();
        let mut columns = vec![Vec::with_capacity(rows.len()); d];
        for (i, row) in rows.iter().enumerate() {
            if row.len() != d {
                return Err(Error::Input(format!("row {} has {} fields, expected {d}", i + 1, row.len())));
            }
            for (c, &x) in columns.iter_mut().zip(row) {
                c.push(x);
            }
        }
        Self::new(names, columns)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    pub fn n_rows(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.column_index(name).map(|i| self.columns[i].as_slice())
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.columns.iter().map(|c| c[i]).collect()
    }

    /// Rows `range` of every column.
    pub fn slice_rows(&self, range: std::ops::Range<usize>) -> DataTable {
        DataTable {
            names: self.names.clone(),
            columns: self.columns.iter().map(|c| c[range.clone()].to_vec()).collect(),
        }
    }

    /// Reads a delimited table with a header row. Every cell must parse as a
    /// finite number; blank cells are rejected with their row number.
    pub fn read_delimited<R: Read>(reader: R, delimiter: u8) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .delimiter(delimiter)
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let names: Vec<String> = rdr
            .headers()
            .map_err(|e| Error::Input(format!("cannot read header: {e}")))?
            .iter()
            .map(str::to_owned)
            .collect();
        if names.is_empty() || names.iter().all(String::is_empty) {
            return Err(Error::Input("table has no columns".into()));
        }
        let mut rows = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let line = i + 2;
            let rec = rec.map_err(|e| Error::Input(format!("line {line}: {e}")))?;
            let mut row = Vec::with_capacity(names.len());
            for (j, cell) in rec.iter().enumerate() {
                if cell.is_empty() {
                    return Err(Error::Input(format!(
                        "line {line}: missing value in column '{}'",
                        names.get(j).map_or("?", String::as_str)
                    )));
                }
                let x: f64 = cell.parse().map_err(|_| {
                    Error::Input(format!(
                        "line {line}: non-numeric value '{cell}' in column '{}'",
                        names.get(j).map_or("?", String::as_str)
                    ))
                })?;
                if !x.is_finite() {
                    return Err(Error::Input(format!("line {line}: non-finite value '{cell}'")));
                }
                row.push(x);
            }
            rows.push(row);
        }
        Self::from_rows(names, &rows)
    }

    pub fn read_path(path: &Path, delimiter: u8) -> Result<Self> {
        let file = std::fs::File::open(path)
            .map_err(|e| Error::Input(format!("cannot open {}: {e}", path.display())))?;
        Self::read_delimited(std::io::BufReader::new(file), delimiter)
    }

    pub fn write_delimited<W: Write>(&self, writer: W, delimiter: u8) -> Result<()> {
        let mut wtr = csv::WriterBuilder::new().delimiter(delimiter).from_writer(writer);
        let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
        wtr.write_record(&self.names).map_err(io)?;
        for i in 0..self.n_rows() {
            let row: Vec<String> = self.columns.iter().map(|c| format_number(c[i])).collect();
            wtr.write_record(&row).map_err(io)?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Shortest representation that parses back to the same `f64`.
pub fn format_number(x: f64) -> String {
    format!("{x:?}")
}
