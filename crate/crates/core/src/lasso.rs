//! Lasso and elastic-net fits by cyclic coordinate descent.
//!
//! The solver minimizes `1/2 |y - X b|^2 + lambda |b|_1 + gamma/2 |b|^2`
//! with covariance updates (the Gram matrix `X^T X` is formed once). When
//! the sweeps settle, the active block is re-solved exactly from its
//! stationarity equations, which brings the KKT residual down to rounding
//! level. Downstream polyhedra are only valid for a certified solution.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::design::DesignMatrix;
use crate::error::{Error, Result};
use crate::linalg::max_abs;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PenaltySpec {
    /// Weight of the l1 term.
    pub lambda: f64,
    /// Weight of the l2 term; zero for the plain lasso.
    pub gamma: f64,
}

impl PenaltySpec {
    pub fn lasso(lambda: f64) -> Self {
        Self { lambda, gamma: 0.0 }
    }

    pub fn elastic_net(lambda: f64, gamma: f64) -> Self {
        Self { lambda, gamma }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return Err(Error::Validation(format!("lambda must be finite and >= 0, got {}", self.lambda)));
        }
        if !(self.gamma.is_finite() && self.gamma >= 0.0) {
            return Err(Error::Validation(format!("gamma must be finite and >= 0, got {}", self.gamma)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub max_sweeps: usize,
    /// Largest coefficient change in a sweep that counts as settled.
    pub coef_tol: f64,
    /// KKT tolerance, relative to `max(1, |X^T y|_inf)`.
    pub kkt_tol: f64,
    /// Band on `|s_i|` defining the equicorrelation set.
    pub active_tol: f64,
    /// Record the objective after every sweep.
    pub track_objective: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            max_sweeps: 100_000,
            coef_tol: 1e-10,
            kkt_tol: 1e-8,
            active_tol: 1e-6,
            track_objective: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LassoSolution {
    pub beta: DVector<f64>,
    /// Full KKT subgradient, inactive entries clipped to [-1, 1].
    pub subgradient: DVector<f64>,
    /// Equicorrelation set in column order.
    pub model: Vec<usize>,
    pub signs: Vec<i8>,
    pub penalty: PenaltySpec,
    pub kkt_residual: f64,
    pub sweeps: usize,
    /// Objective after each sweep, when requested.
    pub objective_trace: Vec<f64>,
}

impl LassoSolution {
    /// Indices of nonzero coefficients.
    pub fn support(&self) -> Vec<usize> {
        (0..self.beta.len()).filter(|&j| self.beta[j] != 0.0).collect()
    }

    pub fn is_null_model(&self) -> bool {
        self.model.is_empty()
    }
}

fn soft_threshold(z: f64, t: f64) -> f64 {
    if z > t {
        z - t
    } else if z < -t {
        z + t
    } else {
        0.0
    }
}

pub fn objective(x: &DesignMatrix, y: &DVector<f64>, beta: &DVector<f64>, penalty: PenaltySpec) -> f64 {
    let r = y - x.values() * beta;
    0.5 * r.norm_squared() + penalty.lambda * beta.lp_norm(1) + 0.5 * penalty.gamma * beta.norm_squared()
}

/// Stationarity check at `beta`.
///
/// Returns the infinity-norm KKT violation and the recovered subgradient
/// `(X^T (y - X beta) - gamma beta) / lambda`, whose entries at zero
/// coefficients are clipped to [-1, 1].
pub fn kkt_check(
    x: &DesignMatrix,
    y: &DVector<f64>,
    beta: &DVector<f64>,
    penalty: PenaltySpec,
) -> Result<(f64, DVector<f64>)> {
    penalty.validate()?;
    x.check_response(y)?;
    if beta.len() != x.p() {
        return Err(Error::Dimension(format!("beta has length {}, design has {} columns", beta.len(), x.p())));
    }
    if penalty.lambda == 0.0 {
        return Err(Error::Unsupported("kkt_check needs lambda > 0 to recover a subgradient".into()));
    }
    let grad = x.values().tr_mul(&(y - x.values() * beta)) - beta * penalty.gamma;
    Ok(kkt_from_gradient(&grad, beta, penalty.lambda))
}

fn kkt_from_gradient(grad: &DVector<f64>, beta: &DVector<f64>, lambda: f64) -> (f64, DVector<f64>) {
    let mut residual: f64 = 0.0;
    let mut sub = DVector::zeros(beta.len());
    for j in 0..beta.len() {
        if beta[j] != 0.0 {
            residual = residual.max((grad[j] - lambda * beta[j].signum()).abs());
            sub[j] = grad[j] / lambda;
        } else {
            residual = residual.max(grad[j].abs() - lambda);
            sub[j] = (grad[j] / lambda).clamp(-1.0, 1.0);
        }
    }
    (residual.max(0.0), sub)
}

/// Equicorrelation set and signs of a certified solution.
pub fn extract_model(sol: &LassoSolution, active_tol: f64) -> Result<(Vec<usize>, Vec<i8>)> {
    let mut model = Vec::new();
    let mut signs = Vec::new();
    for (j, &s) in sol.subgradient.iter().enumerate() {
        let active = s.abs() >= 1.0 - active_tol;
        if sol.beta[j] != 0.0 && !active {
            return Err(Error::InconsistentSolution(format!(
                "coefficient {j} is nonzero but its subgradient is {s}"
            )));
        }
        if active {
            model.push(j);
            let sign = if sol.beta[j] != 0.0 { sol.beta[j] } else { s };
            signs.push(if sign > 0.0 { 1 } else { -1 });
        }
    }
    let support = sol.beta.iter().filter(|b| **b != 0.0).count();
    if model.len() > support {
        log::warn!(
            "equicorrelation set ({} variables) strictly contains the support ({support})",
            model.len()
        );
    }
    Ok((model, signs))
}

/// Fits the lasso (or elastic net when `gamma > 0`) at a single penalty.
pub fn solve(x: &DesignMatrix, y: &DVector<f64>, penalty: PenaltySpec, opts: &SolverOptions) -> Result<LassoSolution> {
    penalty.validate()?;
    x.check_response(y)?;
    let p = x.p();
    let gram = x.values().tr_mul(x.values());
    let xty = x.values().tr_mul(y);
    let scale = max_abs(&xty).max(1.0);
    let tol = opts.kkt_tol * scale;
    let lambda = penalty.lambda;
    let gamma = penalty.gamma;
    if lambda == 0.0 && gamma == 0.0 && x.n() < p {
        return Err(Error::Unsupported("lambda = 0 needs a full-column-rank design".into()));
    }

    let yty = y.norm_squared();
    let objective_of = |beta: &DVector<f64>, grad: &DVector<f64>| {
        // 1/2 y'y - c'b + 1/2 b'Gb with Gb = c - grad
        0.5 * yty - 0.5 * xty.dot(beta) - 0.5 * grad.dot(beta)
            + lambda * beta.lp_norm(1)
            + 0.5 * gamma * beta.norm_squared()
    };

    let mut beta = DVector::zeros(p);
    let mut grad = xty.clone();
    let mut trace = Vec::new();
    if opts.track_objective {
        trace.push(objective_of(&beta, &grad));
    }

    let finish = |beta: DVector<f64>, sweeps: usize, trace: Vec<f64>| -> Result<LassoSolution> {
        let g = &xty - &gram * &beta - &beta * gamma;
        let (kkt_residual, subgradient) = if lambda > 0.0 {
            kkt_from_gradient(&g, &beta, lambda)
        } else {
            (max_abs(&g), DVector::zeros(p))
        };
        let mut sol = LassoSolution {
            beta,
            subgradient,
            model: Vec::new(),
            signs: Vec::new(),
            penalty,
            kkt_residual,
            sweeps,
            objective_trace: trace,
        };
        if lambda > 0.0 {
            let (model, signs) = extract_model(&sol, opts.active_tol)?;
            sol.model = model;
            sol.signs = signs;
        }
        Ok(sol)
    };

    if lambda > 0.0 && max_abs(&xty) <= lambda {
        return finish(beta, 0, trace);
    }

    let mut last_residual = f64::INFINITY;
    for sweep in 1..=opts.max_sweeps {
        let mut max_change: f64 = 0.0;
        for j in 0..p {
            let denom = gram[(j, j)] + gamma;
            if denom == 0.0 {
                continue;
            }
            let z = grad[j] + gram[(j, j)] * beta[j];
            let updated = soft_threshold(z, lambda) / denom;
            let delta = updated - beta[j];
            if delta != 0.0 {
                grad.axpy(-delta, &gram.column(j), 1.0);
                beta[j] = updated;
                max_change = max_change.max(delta.abs());
            }
        }
        if opts.track_objective {
            trace.push(objective_of(&beta, &grad));
        }
        if max_change <= opts.coef_tol {
            // rebuild the gradient to shed accumulated update error
            grad = &xty - &gram * &beta;
            let polished = polish(&gram, &xty, &beta, penalty);
            let residual_of = |b: &DVector<f64>| {
                let g = &xty - &gram * b - b * gamma;
                if lambda > 0.0 {
                    kkt_from_gradient(&g, b, lambda).0
                } else {
                    max_abs(&g)
                }
            };
            let current = residual_of(&beta);
            let (best, best_residual) = match polished {
                Some(b) => {
                    let r = residual_of(&b);
                    if r <= current {
                        (b, r)
                    } else {
                        (beta.clone(), current)
                    }
                }
                None => (beta.clone(), current),
            };
            last_residual = best_residual;
            if best_residual <= tol {
                return finish(best, sweep, trace);
            }
        }
    }
    Err(Error::NonConvergence {
        sweeps: opts.max_sweeps,
        kkt_residual: if last_residual.is_finite() {
            last_residual
        } else {
            let g = &xty - &gram * &beta - &beta * gamma;
            if lambda > 0.0 {
                kkt_from_gradient(&g, &beta, lambda).0
            } else {
                max_abs(&g)
            }
        },
    })
}

/// Exact solve on the current support with its signs held fixed. Returns
/// `None` if the block is singular or the signs do not survive.
fn polish(gram: &DMatrix<f64>, xty: &DVector<f64>, beta: &DVector<f64>, penalty: PenaltySpec) -> Option<DVector<f64>> {
    let support: Vec<usize> = (0..beta.len()).filter(|&j| beta[j] != 0.0).collect();
    if support.is_empty() {
        return None;
    }
    let k = support.len();
    let mut block = DMatrix::from_fn(k, k, |a, b| gram[(support[a], support[b])]);
    for i in 0..k {
        block[(i, i)] += penalty.gamma;
    }
    let rhs = DVector::from_fn(k, |a, _| xty[support[a]] - penalty.lambda * beta[support[a]].signum());
    let solved = block.cholesky()?.solve(&rhs);
    let mut out = DVector::zeros(beta.len());
    for (a, &j) in support.iter().enumerate() {
        if solved[a].signum() != beta[j].signum() || solved[a] == 0.0 {
            return None;
        }
        out[j] = solved[a];
    }
    Some(out)
}
