//! Numeric CSV input.

use std::path::Path;

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn read(path: &Path) -> Result<Self, CliError> {
        let file = std::fs::File::open(path).map_err(|source| CliError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_reader(file).map_err(|message| CliError::Parse {
            path: path.to_path_buf(),
            message,
        })
    }

    pub fn from_reader<R: std::io::Read>(reader: R) -> Result<Self, String> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers: Vec<String> = rdr
            .headers()
            .map_err(|e| e.to_string())?
            .iter()
            .map(str::to_string)
            .collect();
        if headers.is_empty() || headers.iter().all(String::is_empty) {
            return Err("missing header row".into());
        }
        if let Some(col) = headers.iter().position(String::is_empty) {
            return Err(format!("line 1, column {}: empty column name", col + 1));
        }
        for (i, h) in headers.iter().enumerate() {
            if headers[..i].contains(h) {
                return Err(format!("line 1, column {}: duplicate column name {h:?}", i + 1));
            }
        }
        let mut rows = Vec::new();
        for record in rdr.records() {
            let record = record.map_err(|e| e.to_string())?;
            let line = record.position().map_or(0, |p| p.line());
            if record.len() == 1 && record[0].is_empty() {
                continue;
            }
            if record.len() != headers.len() {
                return Err(format!(
                    "line {line}: expected {} fields, found {}",
                    headers.len(),
                    record.len()
                ));
            }
            let row = record
                .iter()
                .enumerate()
                .map(|(c, cell)| match cell.parse::<f64>() {
                    Ok(v) if v.is_finite() => Ok(v),
                    _ => Err(format!(
                        "line {line}, column {} ({}): {cell:?} is not a finite number",
                        c + 1,
                        headers[c]
                    )),
                })
                .collect::<Result<Vec<f64>, String>>()?;
            rows.push(row);
        }
        if rows.is_empty() {
            return Err("no data rows".into());
        }
        Ok(Self { headers, rows })
    }

    /// Column named `name`, matched exactly or else ignoring case when that
    /// is unambiguous.
    pub fn column(&self, name: &str) -> Result<usize, String> {
        if let Some(j) = self.headers.iter().position(|h| h == name) {
            return Ok(j);
        }
        let folded: Vec<usize> = (0..self.headers.len())
            .filter(|&j| self.headers[j].eq_ignore_ascii_case(name))
            .collect();
        match folded.as_slice() {
            [j] => Ok(*j),
            [] => Err(format!("no column named {name:?}; columns are {:?}", self.headers)),
            _ => Err(format!("column name {name:?} is ambiguous up to case")),
        }
    }
}
