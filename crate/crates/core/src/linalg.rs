//! Small dense helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

/// Largest condition number accepted for a selected Gram matrix.
pub const MAX_CONDITION: f64 = 1e10;

/// Inverse of a symmetric positive definite matrix, refusing matrices whose
/// 2-norm condition number reaches [`MAX_CONDITION`].
pub fn spd_inverse(gram: &DMatrix<f64>, what: &str) -> Result<DMatrix<f64>> {
    if gram.is_empty() {
        return Ok(gram.clone());
    }
    let eig = SymmetricEigen::new(gram.clone());
    let max = eig.eigenvalues.max();
    let min = eig.eigenvalues.min();
    if !(min > 0.0) || max / min >= MAX_CONDITION {
        return Err(Error::DegenerateDesign(format!(
            "{what} has condition number {:e} (limit {MAX_CONDITION:e})",
            if min > 0.0 { max / min } else { f64::INFINITY }
        )));
    }
    let inv_diag = eig.eigenvalues.map(|v| 1.0 / v);
    let q = &eig.eigenvectors;
    let mut inv = q * DMatrix::from_diagonal(&inv_diag) * q.transpose();
    // symmetrize away rounding
    let t = inv.transpose();
    inv += t;
    inv *= 0.5;
    Ok(inv)
}

/// Gram matrix `X_M^T X_M + ridge * I` of the listed columns.
pub fn gram(x_m: &DMatrix<f64>, ridge: f64) -> DMatrix<f64> {
    let mut g = x_m.transpose() * x_m;
    for i in 0..g.nrows() {
        g[(i, i)] += ridge;
    }
    g
}

/// Pseudo-inverse `(X^T X)^{-1} X^T` of a full-column-rank matrix.
pub fn pseudo_inverse(x_m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let inv = spd_inverse(&gram(x_m, 0.0), "selected Gram matrix")?;
    Ok(inv * x_m.transpose())
}

/// Residual of `y` after projecting onto the column span of `x`.
pub fn projection_residual(x: &DMatrix<f64>, y: &DVector<f64>) -> Result<DVector<f64>> {
    if x.ncols() == 0 {
        return Ok(y.clone());
    }
    let qr = x.clone().qr();
    let r = qr.r();
    let diag_max = r.diagonal().abs().max();
    let diag_min = r.diagonal().abs().min();
    if !(diag_min > diag_max * 1e-12) {
        return Err(Error::DegenerateDesign("design is not of full column rank".into()));
    }
    let q = qr.q();
    let fitted = &q * (q.transpose() * y);
    Ok(y - fitted)
}

pub fn max_abs(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Maximum absolute row sum.
pub fn inf_norm(a: &DMatrix<f64>) -> f64 {
    a.row_iter()
        .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_model_is_fine() {
        let x = DMatrix::<f64>::zeros(4, 0);
        assert_eq!(pseudo_inverse(&x).unwrap().shape(), (0, 4));
        let y = DVector::from_element(4, 1.0);
        assert_eq!(projection_residual(&x, &y).unwrap(), y);
    }

    #[test]
    fn inverse_of_spd() {
        let g = DMatrix::from_row_slice(2, 2, &[4.0, 1.0, 1.0, 3.0]);
        let inv = spd_inverse(&g, "g").unwrap();
        let id = &g * inv;
        assert!((id - DMatrix::identity(2, 2)).amax() < 1e-14);
    }

    #[test]
    fn singular_is_rejected() {
        let g = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        assert!(matches!(spd_inverse(&g, "g"), Err(Error::DegenerateDesign(_))));
    }

    #[test]
    fn residual_is_orthogonal() {
        let x = DMatrix::from_row_slice(3, 1, &[1.0, 1.0, 1.0]);
        let y = DVector::from_vec(vec![1.0, 2.0, 6.0]);
        let r = projection_residual(&x, &y).unwrap();
        assert!(r.sum().abs() < 1e-12);
        assert!((r[0] + 2.0).abs() < 1e-12);
    }
}
