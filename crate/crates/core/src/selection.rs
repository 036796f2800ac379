//! Affine description of the lasso selection event.
//!
//! For a candidate model `M` with signs `s`, the responses that make the
//! lasso select exactly `(M, s)` form the polyhedron `{A y <= b}` with
//!
//! ```text
//! A0 = (1/lambda) [ X_{-M}^T (I - P_M) ; -X_{-M}^T (I - P_M) ]
//! b0 = [ 1 - X_{-M}^T (X_M^T)^+ s ; 1 + X_{-M}^T (X_M^T)^+ s ]
//! A1 = -diag(s) (X_M^T X_M)^{-1} X_M^T
//! b1 = -lambda diag(s) (X_M^T X_M)^{-1} s
//! ```
//!
//! For the elastic net every `(X_M^T X_M)^{-1}`, including the ones hidden
//! in `P_M` and `(X_M^T)^+`, becomes `(X_M^T X_M + gamma I)^{-1}`.
//! The inactive rows come first (all upper rows, then all lower rows, in
//! column order), followed by one active row per selected variable.

use std::io::{self, Write};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::design::DesignMatrix;
use crate::error::{Error, Result};
use crate::lasso::{self, PenaltySpec, SolverOptions};
use crate::linalg::{gram, spd_inverse};

/// Slack within which a point on the boundary still counts as inside.
pub const MEMBERSHIP_TOL: f64 = 1e-9;

/// Default cap on `|M|` for sign-pattern enumeration.
pub const DEFAULT_SIGN_CAP: usize = 15;

/// Which KKT condition a constraint row encodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RowTag {
    /// `u_j < 1` for inactive column `j`.
    InactiveUpper(usize),
    /// `u_j > -1` for inactive column `j`.
    InactiveLower(usize),
    /// `sign(w_j) = s_j` for active column `j`.
    Active(usize),
}

impl RowTag {
    pub fn column(&self) -> usize {
        match *self {
            RowTag::InactiveUpper(j) | RowTag::InactiveLower(j) | RowTag::Active(j) => j,
        }
    }

    fn label(&self) -> &'static str {
        match self {
            RowTag::InactiveUpper(_) => "inactive+",
            RowTag::InactiveLower(_) => "inactive-",
            RowTag::Active(_) => "active",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionPolyhedron {
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    pub row_tags: Vec<RowTag>,
    pub model: Vec<usize>,
    pub signs: Vec<i8>,
    pub penalty: PenaltySpec,
}

impl SelectionPolyhedron {
    pub fn n_rows(&self) -> usize {
        self.b.len()
    }

    /// Largest violation `max_j (A y - b)_j`; negative when strictly inside.
    pub fn max_violation(&self, y: &DVector<f64>) -> f64 {
        (&self.a * y - &self.b).max()
    }

    pub fn contains(&self, y: &DVector<f64>, tol: f64) -> bool {
        self.max_violation(y) <= tol
    }

    /// Dumps `(tag, column, b, A row)` as CSV for inspection.
    pub fn write_csv<W: Write>(&self, names: &[String], mut out: W) -> io::Result<()> {
        write!(out, "tag,variable,b")?;
        for i in 0..self.a.ncols() {
            write!(out, ",a{}", i + 1)?;
        }
        writeln!(out)?;
        for (r, tag) in self.row_tags.iter().enumerate() {
            let name = names.get(tag.column()).map(String::as_str).unwrap_or("?");
            write!(out, "{},{},{}", tag.label(), name, self.b[r])?;
            for v in self.a.row(r).iter() {
                write!(out, ",{v}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

fn validate_model(p: usize, model: &[usize], signs: Option<&[i8]>, penalty: PenaltySpec) -> Result<()> {
    penalty.validate()?;
    if penalty.lambda <= 0.0 {
        return Err(Error::Unsupported("selection events need lambda > 0".into()));
    }
    if model.is_empty() {
        return Err(Error::Unsupported("the null-model event is not described by this polyhedron".into()));
    }
    if model.windows(2).any(|w| w[0] >= w[1]) || model.iter().any(|&j| j >= p) {
        return Err(Error::Validation(format!("model {model:?} must be strictly increasing column indices < {p}")));
    }
    if let Some(s) = signs {
        if s.len() != model.len() {
            return Err(Error::Dimension(format!("{} signs for {} variables", s.len(), model.len())));
        }
        if s.iter().any(|&v| v != 1 && v != -1) {
            return Err(Error::Validation("signs must be +1 or -1".into()));
        }
    }
    Ok(())
}

/// Sign-independent pieces shared by every polyhedron of one model.
#[derive(Debug, Clone)]
pub struct SignFamily {
    pub model: Vec<usize>,
    pub inactive: Vec<usize>,
    pub penalty: PenaltySpec,
    /// `(1/lambda) X_{-M}^T (I - P_M)`, `(p-k) x n`.
    pub inactive_rows: DMatrix<f64>,
    /// `X_{-M}^T (X_M^T)^+`, `(p-k) x k`.
    pub inactive_offset: DMatrix<f64>,
    /// `(X_M^T X_M + gamma I)^{-1} X_M^T`, `k x n`.
    pub active_rows: DMatrix<f64>,
    /// `(X_M^T X_M + gamma I)^{-1}`.
    pub gram_inverse: DMatrix<f64>,
}

impl SignFamily {
    pub fn new(x: &DesignMatrix, model: &[usize], penalty: PenaltySpec) -> Result<Self> {
        validate_model(x.p(), model, None, penalty)?;
        let x_m = x.columns(model);
        let inactive: Vec<usize> = (0..x.p()).filter(|j| model.binary_search(j).is_err()).collect();
        let x_rest = x.columns(&inactive);
        let gram_inverse = spd_inverse(&gram(&x_m, penalty.gamma), "selected Gram matrix")?;
        // (X_M^T)^+ = X_M G^{-1}, n x k
        let pinv_t = &x_m * &gram_inverse;
        let active_rows = pinv_t.transpose();
        // X_{-M}^T (I - P_M) = X_{-M}^T - (X_{-M}^T X_M G^{-1}) X_M^T
        let inactive_offset = x_rest.tr_mul(&pinv_t);
        let inactive_rows = (x_rest.transpose() - &inactive_offset * x_m.transpose()) / penalty.lambda;
        Ok(Self {
            model: model.to_vec(),
            inactive,
            penalty,
            inactive_rows,
            inactive_offset,
            active_rows,
            gram_inverse,
        })
    }

    pub fn size(&self) -> usize {
        self.model.len()
    }

    /// Right-hand sides `(b0 upper, b0 lower, b1)` for sign vector `s`.
    pub fn offsets(&self, signs: &[f64]) -> (DVector<f64>, DVector<f64>, DVector<f64>) {
        let s = DVector::from_column_slice(signs);
        let shift = &self.inactive_offset * &s;
        let upper = shift.map(|v| 1.0 - v);
        let lower = shift.map(|v| 1.0 + v);
        let gs = &self.gram_inverse * &s;
        let active = DVector::from_fn(s.len(), |i, _| -self.penalty.lambda * s[i] * gs[i]);
        (upper, lower, active)
    }

    pub fn polyhedron(&self, signs: &[i8]) -> SelectionPolyhedron {
        let n = self.active_rows.ncols();
        let q = self.inactive.len();
        let k = self.model.len();
        let s: Vec<f64> = signs.iter().map(|&v| v as f64).collect();
        let (upper, lower, active) = self.offsets(&s);
        let mut a = DMatrix::zeros(2 * q + k, n);
        let mut b = DVector::zeros(2 * q + k);
        let mut tags = Vec::with_capacity(2 * q + k);
        for (r, &j) in self.inactive.iter().enumerate() {
            a.row_mut(r).copy_from(&self.inactive_rows.row(r));
            b[r] = upper[r];
            tags.push(RowTag::InactiveUpper(j));
        }
        for (r, &j) in self.inactive.iter().enumerate() {
            a.row_mut(q + r).copy_from(&(-self.inactive_rows.row(r)));
            b[q + r] = lower[r];
            tags.push(RowTag::InactiveLower(j));
        }
        for (i, &j) in self.model.iter().enumerate() {
            a.row_mut(2 * q + i).copy_from(&(self.active_rows.row(i) * -s[i]));
            b[2 * q + i] = active[i];
            tags.push(RowTag::Active(j));
        }
        SelectionPolyhedron {
            a,
            b,
            row_tags: tags,
            model: self.model.clone(),
            signs: signs.to_vec(),
            penalty: self.penalty,
        }
    }
}

/// Polyhedron `{A y <= b}` of responses selecting exactly `(model, signs)`.
pub fn build_polyhedron(
    x: &DesignMatrix,
    model: &[usize],
    signs: &[i8],
    penalty: PenaltySpec,
) -> Result<SelectionPolyhedron> {
    validate_model(x.p(), model, Some(signs), penalty)?;
    Ok(SignFamily::new(x, model, penalty)?.polyhedron(signs))
}

/// Sign vector number `code` of length `k`: bit `i` set means `s_i = -1`.
pub fn sign_pattern(code: u64, k: usize) -> Vec<i8> {
    (0..k).map(|i| if code >> i & 1 == 1 { -1 } else { 1 }).collect()
}

/// One polyhedron per sign vector in `{-1, +1}^|M|`, infeasible ones
/// included.
pub fn enumerate_sign_polyhedra(
    x: &DesignMatrix,
    model: &[usize],
    penalty: PenaltySpec,
    cap: usize,
) -> Result<Vec<SelectionPolyhedron>> {
    if model.len() > cap {
        return Err(Error::Capacity { size: model.len(), cap });
    }
    let family = SignFamily::new(x, model, penalty)?;
    Ok((0..1u64 << model.len())
        .map(|code| family.polyhedron(&sign_pattern(code, model.len())))
        .collect())
}

/// Runs the solver at `y` and reports the selected `(M, s)`, or `None` for
/// the null model. Used to cross-check polyhedron membership.
pub fn membership_oracle(
    x: &DesignMatrix,
    y: &DVector<f64>,
    penalty: PenaltySpec,
) -> Result<Option<(Vec<usize>, Vec<i8>)>> {
    if penalty.lambda <= 0.0 {
        return Err(Error::Unsupported("membership oracle needs lambda > 0".into()));
    }
    let sol = lasso::solve(x, y, penalty, &SolverOptions::default())?;
    Ok((!sol.model.is_empty()).then_some((sol.model, sol.signs)))
}
