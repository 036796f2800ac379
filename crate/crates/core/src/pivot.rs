//! Restricting a selection polyhedron to the line through `y` along a
//! contrast.
//!
//! Writing `y = c (eta^T y) + z` with `c = Sigma eta / (eta^T Sigma eta)`
//! makes `z` independent of `eta^T y`. Each row of `A y <= b` then bounds
//! `eta^T y` from above, from below, or (when `(A c)_j = 0`) not at all, and
//! the polyhedron becomes `V- <= eta^T y <= V+` together with `V0 >= 0`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{inf_norm, max_abs};
use crate::selection::{sign_pattern, SelectionPolyhedron, SignFamily, MEMBERSHIP_TOL};
use crate::truncnorm::{Interval, TruncationRegion};

/// Relative threshold below which `(A c)_j` is treated as zero.
pub const ZERO_TOL_FACTOR: f64 = 1e-11;
/// Adjacent intervals closer than this many `sd(eta^T y)` are merged.
pub const MERGE_TOL_SD: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Covariance {
    /// `sigma^2 I`.
    Isotropic(f64),
    Full(DMatrix<f64>),
}

impl Covariance {
    fn apply(&self, v: &DVector<f64>) -> Result<DVector<f64>> {
        match self {
            Covariance::Isotropic(s2) => {
                if !(*s2 > 0.0 && s2.is_finite()) {
                    return Err(Error::Validation(format!("noise variance must be positive, got {s2}")));
                }
                Ok(v * *s2)
            }
            Covariance::Full(m) => {
                if m.shape() != (v.len(), v.len()) {
                    return Err(Error::Dimension(format!("covariance is {:?}, expected {}x{}", m.shape(), v.len(), v.len())));
                }
                Ok(m * v)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContrastDecomposition {
    pub eta: DVector<f64>,
    pub covariance: Covariance,
    /// `Sigma eta / (eta^T Sigma eta)`.
    pub c: DVector<f64>,
    /// `(I - c eta^T) y`.
    pub z: DVector<f64>,
    pub eta_y: f64,
    /// `eta^T Sigma eta`.
    pub var_eta: f64,
}

impl ContrastDecomposition {
    pub fn sd_eta(&self) -> f64 {
        self.var_eta.sqrt()
    }
}

pub fn decompose(y: &DVector<f64>, eta: &DVector<f64>, covariance: &Covariance) -> Result<ContrastDecomposition> {
    if y.len() != eta.len() {
        return Err(Error::Dimension(format!("y has length {}, eta has {}", y.len(), eta.len())));
    }
    if eta.iter().all(|v| *v == 0.0) {
        return Err(Error::Validation("contrast eta is zero".into()));
    }
    let sigma_eta = covariance.apply(eta)?;
    let var_eta = eta.dot(&sigma_eta);
    if !(var_eta > 0.0 && var_eta.is_finite()) {
        return Err(Error::Validation(format!("eta^T Sigma eta = {var_eta} is not positive")));
    }
    let c = sigma_eta / var_eta;
    let eta_y = eta.dot(y);
    let z = y - &c * eta_y;
    Ok(ContrastDecomposition {
        eta: eta.clone(),
        covariance: covariance.clone(),
        c,
        z,
        eta_y,
        var_eta,
    })
}

/// Nonempty intersection of one polyhedron with the line `c t + z`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineInterval {
    pub lower: f64,
    pub upper: f64,
    pub v0_slack: f64,
    /// Row attaining `V-`, if any.
    pub lower_row: Option<usize>,
    /// Row attaining `V+`, if any.
    pub upper_row: Option<usize>,
}

impl LineInterval {
    pub fn to_region(&self) -> Result<TruncationRegion> {
        TruncationRegion::new(vec![Interval::new(self.lower, self.upper)], self.v0_slack)
    }
}

/// Accumulates `V-`, `V+` and `V0` row by row.
struct LimitsAccumulator {
    zero_tol: f64,
    lower: f64,
    upper: f64,
    v0: f64,
    lower_row: Option<usize>,
    upper_row: Option<usize>,
}

impl LimitsAccumulator {
    fn new(zero_tol: f64) -> Self {
        Self {
            zero_tol,
            lower: f64::NEG_INFINITY,
            upper: f64::INFINITY,
            v0: f64::INFINITY,
            lower_row: None,
            upper_row: None,
        }
    }

    /// Row `coef * t <= rhs`, with `rhs = b_j - (A z)_j`.
    fn push(&mut self, row: usize, coef: f64, rhs: f64) {
        if coef.abs() <= self.zero_tol {
            self.v0 = self.v0.min(rhs);
        } else if coef > 0.0 {
            let t = rhs / coef;
            if t < self.upper {
                self.upper = t;
                self.upper_row = Some(row);
            }
        } else {
            let t = rhs / coef;
            if t > self.lower {
                self.lower = t;
                self.lower_row = Some(row);
            }
        }
    }

    fn finish(self) -> Option<LineInterval> {
        (self.lower < self.upper && self.v0 >= -MEMBERSHIP_TOL).then_some(LineInterval {
            lower: self.lower,
            upper: self.upper,
            v0_slack: self.v0,
            lower_row: self.lower_row,
            upper_row: self.upper_row,
        })
    }
}

/// `V-`, `V+`, `V0` of `{A y <= b}` along `y = c t + z`; `None` when the
/// line misses the polyhedron.
pub fn line_limits(a: &DMatrix<f64>, b: &DVector<f64>, c: &DVector<f64>, z: &DVector<f64>) -> Result<Option<LineInterval>> {
    if a.ncols() != c.len() || a.ncols() != z.len() || a.nrows() != b.len() {
        return Err(Error::Dimension(format!(
            "A is {:?}, b has {}, c has {}, z has {}",
            a.shape(),
            b.len(),
            c.len(),
            z.len()
        )));
    }
    let ac = a * c;
    let az = a * z;
    let mut acc = LimitsAccumulator::new(ZERO_TOL_FACTOR * inf_norm(a) * max_abs(c));
    for j in 0..b.len() {
        acc.push(j, ac[j], b[j] - az[j]);
    }
    Ok(acc.finish())
}

pub fn truncation_limits(poly: &SelectionPolyhedron, dec: &ContrastDecomposition) -> Result<Option<LineInterval>> {
    line_limits(&poly.a, &poly.b, &dec.c, &dec.z)
}

/// Sorts and merges per-polyhedron intervals into one region.
pub fn merge_intervals(mut parts: Vec<LineInterval>, sd_eta: f64) -> Result<TruncationRegion> {
    if parts.is_empty() {
        return Err(Error::Inconsistent("no sign pattern meets the line through y".into()));
    }
    parts.sort_by(|a, b| a.lower.total_cmp(&b.lower));
    let tol = MERGE_TOL_SD * sd_eta;
    let v0 = parts.iter().map(|p| p.v0_slack).fold(f64::INFINITY, f64::min);
    let mut merged: Vec<Interval> = Vec::with_capacity(parts.len());
    for p in parts {
        match merged.last_mut() {
            Some(last) if p.lower <= last.upper + tol => last.upper = last.upper.max(p.upper),
            _ => merged.push(Interval::new(p.lower, p.upper)),
        }
    }
    TruncationRegion::new(merged, v0)
}

/// Union of line restrictions over a list of polyhedra for one model.
pub fn union_region(polys: &[SelectionPolyhedron], dec: &ContrastDecomposition) -> Result<TruncationRegion> {
    let mut parts = Vec::new();
    for poly in polys {
        if let Some(iv) = truncation_limits(poly, dec)? {
            parts.push(iv);
        }
    }
    merge_intervals(parts, dec.sd_eta())
}

/// Per-sign-pattern line restrictions from the shared pieces of a model,
/// indexed like [`sign_pattern`]. Costs `O(p k)` per pattern instead of
/// rebuilding each polyhedron.
pub fn sign_family_limits(family: &SignFamily, dec: &ContrastDecomposition) -> Vec<Option<LineInterval>> {
    let k = family.size();
    let q = family.inactive.len();
    let inactive_c = &family.inactive_rows * &dec.c;
    let inactive_z = &family.inactive_rows * &dec.z;
    let active_c = &family.active_rows * &dec.c;
    let active_z = &family.active_rows * &dec.z;

    // matches the row scaling of the assembled polyhedron
    let row_norm = |m: &DMatrix<f64>| inf_norm(m);
    let a_norm = row_norm(&family.inactive_rows).max(row_norm(&family.active_rows));
    let zero_tol = ZERO_TOL_FACTOR * a_norm * max_abs(&dec.c);

    (0..1u64 << k)
        .map(|code| {
            let s: Vec<f64> = sign_pattern(code, k).iter().map(|&v| v as f64).collect();
            let (upper, lower, active) = family.offsets(&s);
            let mut acc = LimitsAccumulator::new(zero_tol);
            for r in 0..q {
                acc.push(r, inactive_c[r], upper[r] - inactive_z[r]);
            }
            for r in 0..q {
                acc.push(q + r, -inactive_c[r], lower[r] + inactive_z[r]);
            }
            for i in 0..k {
                acc.push(2 * q + i, -s[i] * active_c[i], active[i] + s[i] * active_z[i]);
            }
            acc.finish()
        })
        .collect()
}

/// Model-conditioned region: union over all `2^|M|` sign patterns.
pub fn union_region_for_model(family: &SignFamily, dec: &ContrastDecomposition) -> Result<TruncationRegion> {
    merge_intervals(sign_family_limits(family, dec).into_iter().flatten().collect(), dec.sd_eta())
}
