//! End-to-end selective inference for lasso-selected coefficients.
//!
//! For every selected variable `j` the contrast is the `j`-th row of the
//! pseudo-inverse of `X_M`, so `eta^T mu` is the coefficient of `x_j` in the
//! best linear fit on the selected columns. Its observed value is then
//! referred to a Gaussian truncated to the line restriction of the
//! selection event, either for the observed signs alone or for the union
//! over all sign patterns of the model.

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::design::DesignMatrix;
use crate::error::{Error, Result};
use crate::lasso::{self, LassoSolution, PenaltySpec, SolverOptions};
use crate::linalg::{max_abs, projection_residual, pseudo_inverse};
use crate::parallel;
use crate::pivot::{self, decompose, ContrastDecomposition, Covariance};
use crate::rng;
use crate::selection::{build_polyhedron, SignFamily, DEFAULT_SIGN_CAP};
use crate::special::{ndtr, ndtri};
use crate::truncnorm::{self, Pivot, TruncationRegion};

/// Observations this many `sd(eta^T y)` outside the region are pulled in.
const CONTAINMENT_TOL_SD: f64 = 1e-6;
/// Margin, in `sd(eta^T y)`, left between a clamped estimate and the boundary.
const CLAMP_MARGIN_SD: f64 = 1e-12;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConditioningMode {
    /// Condition on the selected model and its signs.
    #[default]
    Sign,
    /// Condition on the selected model only.
    Model,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    SignConditioned,
    ModelConditioned,
    DataSplit,
    NaiveOls,
}

impl From<ConditioningMode> for Method {
    fn from(mode: ConditioningMode) -> Self {
        match mode {
            ConditioningMode::Sign => Method::SignConditioned,
            ConditioningMode::Model => Method::ModelConditioned,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InferOptions {
    pub alpha: f64,
    pub mode: ConditioningMode,
    /// Largest model for which sign patterns are enumerated.
    pub sign_cap: usize,
    pub solver: SolverOptions,
}

impl Default for InferOptions {
    fn default() -> Self {
        Self {
            alpha: 0.1,
            mode: ConditioningMode::Sign,
            sign_cap: DEFAULT_SIGN_CAP,
            solver: SolverOptions::default(),
        }
    }
}

/// Coefficient `beta^M_j` of a selected model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InferenceTarget {
    pub model: Vec<usize>,
    /// Column index `j`.
    pub coef_index: usize,
    /// Position of `j` inside `model`.
    pub position: usize,
    /// `(X_M^+)^T e_j`.
    pub eta: DVector<f64>,
    pub name: String,
}

impl InferenceTarget {
    /// `eta^T mu`, the value the interval is meant to cover.
    pub fn value(&self, mu: &DVector<f64>) -> f64 {
        self.eta.dot(mu)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectiveInterval {
    pub target: InferenceTarget,
    /// `eta^T y`.
    pub estimate: f64,
    pub lower: f64,
    pub upper: f64,
    pub level: f64,
    pub method: Method,
    /// Two-sided p-value for `beta^M_j = 0`.
    pub pivot_at_zero: f64,
    pub region: TruncationRegion,
    /// `sqrt(eta^T Sigma eta)`.
    pub sd_eta: f64,
}

impl SelectiveInterval {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn covers(&self, value: f64) -> bool {
        self.lower <= value && value <= self.upper
    }

    /// Pivot of the observed estimate under mean `mu`.
    pub fn pivot(&self, mu: f64) -> Result<Pivot> {
        truncnorm::tn_pivot(self.estimate, mu, self.sd_eta * self.sd_eta, &self.region)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TargetFailure {
    pub coef_index: usize,
    pub name: String,
    pub error: Error,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Inference {
    pub solution: LassoSolution,
    pub model: Vec<usize>,
    pub signs: Vec<i8>,
    pub null_model: bool,
    /// One entry per selected variable, in column order.
    pub outcomes: Vec<Result<SelectiveInterval, TargetFailure>>,
}

impl Inference {
    pub fn intervals(&self) -> impl Iterator<Item = &SelectiveInterval> {
        self.outcomes.iter().filter_map(|o| o.as_ref().ok())
    }

    pub fn failures(&self) -> impl Iterator<Item = &TargetFailure> {
        self.outcomes.iter().filter_map(|o| o.as_ref().err())
    }
}

/// `sigma^2` estimate from the residuals of the full least-squares fit.
pub fn estimate_sigma(x: &DesignMatrix, y: &DVector<f64>) -> Result<f64> {
    x.check_response(y)?;
    let (n, p) = (x.n(), x.p());
    if n <= p {
        return Err(Error::SigmaRequired { n, p });
    }
    let r = projection_residual(x.values(), y)?;
    Ok(r.norm_squared() / (n - p) as f64)
}

/// `lambda = 2 E |X^T eps|_inf` with `eps ~ N(0, sigma2 I)`, by simulation.
pub fn select_lambda(x: &DesignMatrix, sigma2: f64, n_draws: usize, seed: u64) -> Result<f64> {
    let mut rng = rng::stream(seed, rng::STREAM_LAMBDA);
    select_lambda_with(x, sigma2, n_draws, &mut rng)
}

fn select_lambda_with<R: Rng>(x: &DesignMatrix, sigma2: f64, n_draws: usize, rng: &mut R) -> Result<f64> {
    if n_draws < 100 {
        return Err(Error::Validation(format!("need at least 100 draws, got {n_draws}")));
    }
    if !(sigma2 > 0.0 && sigma2.is_finite()) {
        return Err(Error::Validation(format!("noise variance must be positive, got {sigma2}")));
    }
    let sigma = sigma2.sqrt();
    let total: f64 = (0..n_draws)
        .map(|_| {
            let eps = rng::normal_vector(rng, x.n(), sigma);
            max_abs(&x.values().tr_mul(&eps))
        })
        .sum();
    Ok(2.0 * total / n_draws as f64)
}

/// How the l1 penalty is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "lowercase")]
pub enum LambdaRule {
    Fixed { lambda: f64 },
    /// `2 E |X^T eps|_inf`, estimated from `draws` simulations.
    Expectation { draws: usize },
}

impl LambdaRule {
    pub fn resolve(&self, x: &DesignMatrix, sigma2: f64, seed: u64) -> Result<f64> {
        match *self {
            LambdaRule::Fixed { lambda } => Ok(lambda),
            LambdaRule::Expectation { draws } => select_lambda(x, sigma2, draws, seed),
        }
    }
}

/// Rows of `X_M^+`, one contrast per selected variable.
pub fn contrasts(x: &DesignMatrix, model: &[usize]) -> Result<DMatrix<f64>> {
    pseudo_inverse(&x.columns(model))
}

fn targets(x: &DesignMatrix, model: &[usize]) -> Result<Vec<InferenceTarget>> {
    let pinv = contrasts(x, model)?;
    Ok(model
        .iter()
        .enumerate()
        .map(|(pos, &j)| InferenceTarget {
            model: model.to_vec(),
            coef_index: j,
            position: pos,
            eta: pinv.row(pos).transpose(),
            name: x.column_names()[j].clone(),
        })
        .collect())
}

fn validate_common(sigma2: f64, alpha: f64) -> Result<()> {
    if !(sigma2 > 0.0 && sigma2.is_finite()) {
        return Err(Error::Validation(format!("noise variance must be positive, got {sigma2}")));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Validation(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    Ok(())
}

enum Conditioning {
    Sign(crate::selection::SelectionPolyhedron),
    Model(SignFamily),
}

fn region_for(cond: &Conditioning, dec: &ContrastDecomposition) -> Result<TruncationRegion> {
    match cond {
        Conditioning::Sign(poly) => {
            let iv = pivot::truncation_limits(poly, dec)?.ok_or_else(|| {
                Error::Inconsistent("observed response lies outside its own selection polyhedron".into())
            })?;
            iv.to_region()
        }
        Conditioning::Model(family) => pivot::union_region_for_model(family, dec),
    }
}

/// Selective interval for one target given the conditioning region.
pub fn interval_from_region(
    target: InferenceTarget,
    dec: &ContrastDecomposition,
    region: TruncationRegion,
    alpha: f64,
    method: Method,
) -> Result<SelectiveInterval> {
    let sd = dec.sd_eta();
    let estimate = if region.contains(dec.eta_y) {
        dec.eta_y
    } else {
        let clamped = region
            .clamp(dec.eta_y, CONTAINMENT_TOL_SD * sd, CLAMP_MARGIN_SD * sd)
            .ok_or_else(|| {
                Error::Inconsistent(format!(
                    "estimate {} lies {} outside its truncation region",
                    dec.eta_y,
                    region.distance(dec.eta_y)
                ))
            })?;
        log::warn!("estimate for {} sits on its truncation boundary; nudged inside", target.name);
        clamped
    };
    let estimate = match region.clamp(estimate, CLAMP_MARGIN_SD * sd, CLAMP_MARGIN_SD * sd) {
        Some(v) => v,
        None => estimate,
    };
    let (lower, upper) = truncnorm::tn_interval_bounds(estimate, dec.var_eta, &region, alpha)?;
    let pivot_at_zero = truncnorm::tn_pivot(estimate, 0.0, dec.var_eta, &region)?.two_sided;
    Ok(SelectiveInterval {
        target,
        estimate,
        lower,
        upper,
        level: 1.0 - alpha,
        method,
        pivot_at_zero,
        region,
        sd_eta: sd,
    })
}

/// Fits the lasso and forms a selective interval for every selected
/// coefficient. A failure on one coefficient is recorded in its outcome
/// and does not stop the others.
pub fn infer(
    x: &DesignMatrix,
    y: &DVector<f64>,
    penalty: PenaltySpec,
    sigma2: f64,
    opts: &InferOptions,
) -> Result<Inference> {
    validate_common(sigma2, opts.alpha)?;
    if !(penalty.lambda > 0.0) {
        return Err(Error::Validation("selective inference needs lambda > 0".into()));
    }
    let solution = lasso::solve(x, y, penalty, &opts.solver)?;
    let model = solution.model.clone();
    let signs = solution.signs.clone();
    if model.is_empty() {
        return Ok(Inference {
            solution,
            model,
            signs,
            null_model: true,
            outcomes: Vec::new(),
        });
    }
    let conditioning = match opts.mode {
        ConditioningMode::Sign => Conditioning::Sign(build_polyhedron(x, &model, &signs, penalty)?),
        ConditioningMode::Model => {
            if model.len() > opts.sign_cap {
                return Err(Error::Capacity {
                    size: model.len(),
                    cap: opts.sign_cap,
                });
            }
            Conditioning::Model(SignFamily::new(x, &model, penalty)?)
        }
    };
    let covariance = Covariance::Isotropic(sigma2);
    let method = Method::from(opts.mode);
    let outcomes = parallel::map(targets(x, &model)?, |target| {
        let coef_index = target.coef_index;
        let name = target.name.clone();
        let run = || -> Result<SelectiveInterval> {
            let dec = decompose(y, &target.eta, &covariance)?;
            let region = region_for(&conditioning, &dec)?;
            interval_from_region(target, &dec, region, opts.alpha, method)
        };
        run().map_err(|error| TargetFailure { coef_index, name, error })
    });
    Ok(Inference {
        solution,
        model,
        signs,
        null_model: false,
        outcomes,
    })
}

/// Classical known-sigma interval `eta^T y -/+ z sigma |eta|`.
pub fn gaussian_interval(target: InferenceTarget, y: &DVector<f64>, sigma2: f64, alpha: f64, method: Method) -> SelectiveInterval {
    let estimate = target.eta.dot(y);
    let sd = sigma2.sqrt() * target.eta.norm();
    let q = ndtri(1.0 - 0.5 * alpha);
    SelectiveInterval {
        estimate,
        lower: estimate - q * sd,
        upper: estimate + q * sd,
        level: 1.0 - alpha,
        method,
        pivot_at_zero: 2.0 * ndtr(-(estimate / sd).abs()),
        region: TruncationRegion::real_line(),
        sd_eta: sd,
        target,
    }
}

/// OLS intervals for the given model that ignore selection.
pub fn naive_intervals(
    x: &DesignMatrix,
    y: &DVector<f64>,
    model: &[usize],
    sigma2: f64,
    alpha: f64,
) -> Result<Vec<SelectiveInterval>> {
    validate_common(sigma2, alpha)?;
    Ok(targets(x, model)?
        .into_iter()
        .map(|t| gaussian_interval(t, y, sigma2, alpha, Method::NaiveOls))
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitInference {
    /// Rows used for selection.
    pub selection_rows: Vec<usize>,
    /// Rows used for the intervals.
    pub inference_rows: Vec<usize>,
    pub penalty: PenaltySpec,
    pub model: Vec<usize>,
    pub intervals: Vec<SelectiveInterval>,
}

/// Selects on a random half and forms classical intervals on the other.
///
/// Targets are defined through the inference half: `eta` is zero on the
/// selection rows and equals the row of `(X2_M)^+` on the others.
pub fn data_split_baseline(
    x: &DesignMatrix,
    y: &DVector<f64>,
    rule: LambdaRule,
    gamma: f64,
    sigma2: f64,
    alpha: f64,
    seed: u64,
    solver: &SolverOptions,
) -> Result<SplitInference> {
    let mut split_rng = rng::stream(seed, rng::STREAM_SPLIT);
    let resolve = |half: &DesignMatrix| -> Result<PenaltySpec> {
        Ok(PenaltySpec::elastic_net(rule.resolve(half, sigma2, seed)?, gamma))
    };
    data_split_with(x, y, resolve, sigma2, alpha, &mut split_rng, solver)
}

pub(crate) fn data_split_with<R: Rng, F>(
    x: &DesignMatrix,
    y: &DVector<f64>,
    penalty_for: F,
    sigma2: f64,
    alpha: f64,
    rng: &mut R,
    solver: &SolverOptions,
) -> Result<SplitInference>
where
    F: Fn(&DesignMatrix) -> Result<PenaltySpec>,
{
    validate_common(sigma2, alpha)?;
    x.check_response(y)?;
    let n = x.n();
    if n < 4 {
        return Err(Error::Validation(format!("data splitting needs n >= 4, got {n}")));
    }
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    let mut selection_rows = perm[..n / 2].to_vec();
    let mut inference_rows = perm[n / 2..].to_vec();
    selection_rows.sort_unstable();
    inference_rows.sort_unstable();

    let x1 = x.select_rows(&selection_rows)?;
    let y1 = DVector::from_iterator(selection_rows.len(), selection_rows.iter().map(|&i| y[i]));
    let penalty = penalty_for(&x1)?;
    let sol = lasso::solve(&x1, &y1, penalty, solver)?;
    let model = sol.model;
    if model.is_empty() {
        return Ok(SplitInference {
            selection_rows,
            inference_rows,
            penalty,
            model,
            intervals: Vec::new(),
        });
    }
    let x2 = x.select_rows(&inference_rows)?;
    let pinv = contrasts(&x2, &model)?;
    let intervals = model
        .iter()
        .enumerate()
        .map(|(pos, &j)| {
            let mut eta = DVector::zeros(n);
            for (k, &row) in inference_rows.iter().enumerate() {
                eta[row] = pinv[(pos, k)];
            }
            let target = InferenceTarget {
                model: model.clone(),
                coef_index: j,
                position: pos,
                eta,
                name: x.column_names()[j].clone(),
            };
            gaussian_interval(target, y, sigma2, alpha, Method::DataSplit)
        })
        .collect();
    Ok(SplitInference {
        selection_rows,
        inference_rows,
        penalty,
        model,
        intervals,
    })
}
