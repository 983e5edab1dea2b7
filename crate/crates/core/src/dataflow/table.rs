use std::collections::HashSet;
use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnKind {
    Numeric,
    Text,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    pub kind: ColumnKind,
}

/// A loaded dataset. Cells are kept as text; numeric columns are read through
/// [`Table::numeric`], where empty or unparsable cells count as missing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<String>>,
}

fn parse_finite(cell: &str) -> Option<f64> {
    let trimmed = cell.trim();
    if trimmed.is_empty() {
        return None;
    }
    trimmed.parse::<f64>().ok().filter(|v| v.is_finite())
}

impl Table {
    /// Builds a table from already-split rows, inferring column kinds.
    pub fn new(name: impl Into<String>, header: Vec<String>, rows: Vec<Vec<String>>) -> Result<Self> {
        let name = name.into();
        let mut seen = HashSet::new();
        for column in &header {
            if !seen.insert(column.as_str()) {
                return Err(Error::MalformedData(format!("duplicate column name {column:?}")));
            }
        }
        for (index, row) in rows.iter().enumerate() {
            if row.len() != header.len() {
                return Err(Error::MalformedData(format!(
                    "row {} has {} cells, expected {}",
                    index + 1,
                    row.len(),
                    header.len()
                )));
            }
        }
        let columns = header
            .into_iter()
            .enumerate()
            .map(|(col, name)| {
                let mut non_empty = rows.iter().map(|r| r[col].trim()).filter(|c| !c.is_empty()).peekable();
                let numeric = non_empty.peek().is_some() && non_empty.all(|c| parse_finite(c).is_some());
                Column {
                    name,
                    kind: if numeric { ColumnKind::Numeric } else { ColumnKind::Text },
                }
            })
            .collect();
        Ok(Table { name, columns, rows })
    }

    /// Reads delimiter-separated text with a header row.
    pub fn from_reader<R: Read>(name: impl Into<String>, reader: R, delimiter: u8) -> Result<Self> {
        let mut csv = csv::ReaderBuilder::new()
            .delimiter(delimiter)
            .has_headers(true)
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let header: Vec<String> = csv
            .headers()
            .map_err(|e| Error::MalformedData(e.to_string()))?
            .iter()
            .map(str::to_string)
            .collect();
        if header.is_empty() || header.iter().all(|h| h.is_empty()) {
            return Err(Error::MalformedData("missing header row".into()));
        }
        let mut rows = Vec::new();
        for record in csv.records() {
            let record = record.map_err(|e| Error::MalformedData(e.to_string()))?;
            rows.push(record.iter().map(str::to_string).collect());
        }
        Table::new(name, header, rows)
    }

    pub fn from_text(name: impl Into<String>, text: &str, delimiter: u8) -> Result<Self> {
        Table::from_reader(name, text.as_bytes(), delimiter)
    }

    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    /// Exact lookup first, then case-insensitive.
    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns
            .iter()
            .position(|c| c.name == name)
            .or_else(|| self.columns.iter().position(|c| c.name.eq_ignore_ascii_case(name)))
    }

    pub fn column(&self, name: &str) -> Option<&Column> {
        self.column_index(name).map(|i| &self.columns[i])
    }

    pub fn cell(&self, row: usize, col: usize) -> &str {
        &self.rows[row][col]
    }

    pub fn numeric(&self, row: usize, col: usize) -> Option<f64> {
        if self.columns[col].kind != ColumnKind::Numeric {
            return None;
        }
        parse_finite(&self.rows[row][col])
    }

    pub fn numeric_columns(&self) -> impl Iterator<Item = &Column> {
        self.columns.iter().filter(|c| c.kind == ColumnKind::Numeric)
    }
}
