use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance used when checking the standardization of a design.
pub const STANDARDIZE_TOL: f64 = 1e-8;

/// Fixed `n x p` predictor matrix.
///
/// A standardized design has centered columns scaled to unit Euclidean
/// norm. The penalty level of a lasso fit is only comparable across data
/// sets under this scaling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignMatrix {
    values: DMatrix<f64>,
    column_names: Vec<String>,
    standardized: bool,
}

impl DesignMatrix {
    pub fn new(values: DMatrix<f64>, column_names: Vec<String>) -> Result<Self> {
        let (n, p) = values.shape();
        if n == 0 || p == 0 {
            return Err(Error::Validation(format!("design must be non-empty, got {n}x{p}")));
        }
        if column_names.len() != p {
            return Err(Error::Dimension(format!(
                "{} column names for {p} columns",
                column_names.len()
            )));
        }
        if let Some(idx) = values.iter().position(|v| !v.is_finite()) {
            let (row, col) = (idx % n, idx / n);
            return Err(Error::Validation(format!(
                "non-finite entry at row {row}, column {}",
                column_names[col]
            )));
        }
        Ok(Self {
            values,
            column_names,
            standardized: false,
        })
    }

    /// Design with generated column names `x1..xp`.
    pub fn from_matrix(values: DMatrix<f64>) -> Result<Self> {
        let names = (1..=values.ncols()).map(|j| format!("x{j}")).collect();
        Self::new(values, names)
    }

    pub fn from_rows(rows: &[Vec<f64>], column_names: Vec<String>) -> Result<Self> {
        let n = rows.len();
        let p = column_names.len();
        if let Some((i, row)) = rows.iter().enumerate().find(|(_, r)| r.len() != p) {
            return Err(Error::Dimension(format!("row {i} has {} entries, expected {p}", row.len())));
        }
        Self::new(DMatrix::from_fn(n, p, |i, j| rows[i][j]), column_names)
    }

    /// Marks an already standardized matrix, verifying the claim.
    pub fn assume_standardized(mut self) -> Result<Self> {
        for (j, col) in self.values.column_iter().enumerate() {
            let mean = col.mean();
            let norm = col.norm();
            if mean.abs() > STANDARDIZE_TOL || (norm - 1.0).abs() > STANDARDIZE_TOL {
                return Err(Error::Validation(format!(
                    "column {} is not standardized (mean {mean:e}, norm {norm})",
                    self.column_names[j]
                )));
            }
        }
        self.standardized = true;
        Ok(self)
    }

    /// Centers every column and scales it to unit norm.
    pub fn standardize(&self) -> Result<Self> {
        let mut values = self.values.clone();
        for (j, mut col) in values.column_iter_mut().enumerate() {
            let mean = col.mean();
            col.add_scalar_mut(-mean);
            let norm = col.norm();
            if norm == 0.0 {
                return Err(Error::DegenerateDesign(format!(
                    "column {} is constant",
                    self.column_names[j]
                )));
            }
            col /= norm;
        }
        Self::new(values, self.column_names.clone())?.assume_standardized()
    }

    /// Design restricted to the given rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Result<Self> {
        let values = self.values.select_rows(rows.iter());
        let mut out = Self::new(values, self.column_names.clone())?;
        out.standardized = false;
        Ok(out)
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn column_names(&self) -> &[String] {
        &self.column_names
    }

    pub fn is_standardized(&self) -> bool {
        self.standardized
    }

    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    pub fn p(&self) -> usize {
        self.values.ncols()
    }

    /// Columns in `model`, in that order.
    pub fn columns(&self, model: &[usize]) -> DMatrix<f64> {
        self.values.select_columns(model.iter())
    }

    pub fn check_response(&self, y: &DVector<f64>) -> Result<()> {
        if y.len() != self.n() {
            return Err(Error::Dimension(format!(
                "response has length {}, design has {} rows",
                y.len(),
                self.n()
            )));
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::Validation("response has non-finite entries".into()));
        }
        Ok(())
    }
}

/// Centers a response vector.
pub fn center(y: &DVector<f64>) -> DVector<f64> {
    let mean = y.mean();
    y.add_scalar(-mean)
}
