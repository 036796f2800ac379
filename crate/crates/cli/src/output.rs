//! Atomic file output and number formatting shared by JSON and CSV.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Serialize, Serializer};

use crate::error::CliError;

/// Shortest decimal that parses back to the same double; `inf`, `-inf` and
/// `nan` otherwise.
pub fn fmt_num(x: f64) -> String {
    if x.is_finite() {
        serde_json::to_string(&x).expect("finite doubles serialize")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// A double that keeps infinite values in JSON, as the strings `"inf"` and
/// `"-inf"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Num(pub f64);

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.0.is_finite() {
            s.serialize_f64(self.0)
        } else {
            s.serialize_str(&fmt_num(self.0))
        }
    }
}

pub struct OutDir {
    root: PathBuf,
}

impl OutDir {
    pub fn create(root: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(root).map_err(|source| CliError::Write {
            path: root.to_path_buf(),
            source,
        })?;
        Ok(Self {
            root: root.to_path_buf(),
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    /// Writes through a temporary file in the same directory and renames it
    /// into place.
    pub fn write(&self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        let target = self.path(name);
        let tmp = self.path(&format!(".{name}.tmp{}", std::process::id()));
        let fail = |source| CliError::Write {
            path: target.clone(),
            source,
        };
        let mut f = std::fs::File::create(&tmp).map_err(fail)?;
        f.write_all(bytes).map_err(fail)?;
        f.sync_all().map_err(fail)?;
        drop(f);
        std::fs::rename(&tmp, &target).map_err(fail)
    }

    pub fn write_json<T: Serialize>(&self, name: &str, value: &T) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Write {
            path: self.path(name),
            source: std::io::Error::other(e),
        })?;
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    pub fn write_csv(&self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
        let fail = |e: csv::Error| CliError::Write {
            path: self.path(name),
            source: std::io::Error::other(e),
        };
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(header).map_err(fail)?;
        for row in rows {
            w.write_record(row).map_err(fail)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Write {
            path: self.path(name),
            source: std::io::Error::other(e.to_string()),
        })?;
        self.write(name, &bytes)
    }
}
