//! Monte Carlo checks of coverage, FCR and pivot uniformity.
//!
//! The design is drawn once per experiment and held fixed; every
//! replication draws fresh noise from its own stream, so results do not
//! depend on how replications are scheduled. Coverage is always judged
//! against the target of the model actually selected in that replication,
//! `X_M^+ X beta`, not against the generating `beta`.

use std::collections::BTreeMap;

use nalgebra::DVector;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::design::DesignMatrix;
use crate::error::{Error, Result};
use crate::lasso::{PenaltySpec, SolverOptions};
use crate::parallel;
use crate::pipeline::{self, ConditioningMode, InferOptions, LambdaRule, SelectiveInterval};
use crate::rng;
use crate::selection::DEFAULT_SIGN_CAP;
use crate::stats::{ks_uniform, KsResult};

/// Fraction of replications allowed to fail numerically.
pub const FAILURE_BUDGET: f64 = 0.01;
/// Per-variable KS tests need at least this many pivots.
pub const MIN_KS_SAMPLES: usize = 20;
/// Failure messages kept in a report.
const MAX_FAILURE_MESSAGES: usize = 20;

fn default_cap() -> usize {
    DEFAULT_SIGN_CAP
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub n: usize,
    pub p: usize,
    pub true_beta: Vec<f64>,
    pub sigma: f64,
    pub lambda_rule: LambdaRule,
    #[serde(default)]
    pub gamma: f64,
    pub alpha: f64,
    pub replications: usize,
    #[serde(default)]
    pub mode: ConditioningMode,
    #[serde(default = "default_cap")]
    pub sign_cap: usize,
    pub seed: u64,
}

impl ExperimentConfig {
    /// `k` leading coefficients equal to `strength`, the rest zero.
    pub fn sparse(n: usize, p: usize, k: usize, strength: f64, sigma: f64, lambda_rule: LambdaRule, seed: u64) -> Self {
        let true_beta = (0..p).map(|j| if j < k { strength } else { 0.0 }).collect();
        Self {
            n,
            p,
            true_beta,
            sigma,
            lambda_rule,
            gamma: 0.0,
            alpha: 0.1,
            replications: 1000,
            mode: ConditioningMode::Sign,
            sign_cap: DEFAULT_SIGN_CAP,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Validation(msg));
        if self.replications == 0 {
            return bad("replications must be at least 1".into());
        }
        if self.n < 2 || self.p == 0 {
            return bad(format!("need n >= 2 and p >= 1, got n = {}, p = {}", self.n, self.p));
        }
        if self.true_beta.len() != self.p {
            return bad(format!("true_beta has {} entries but p = {}", self.true_beta.len(), self.p));
        }
        if self.true_beta.iter().any(|b| !b.is_finite()) {
            return bad("true_beta must be finite".into());
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return bad(format!("sigma must be positive, got {}", self.sigma));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad(format!("alpha must lie in (0, 1), got {}", self.alpha));
        }
        match self.lambda_rule {
            LambdaRule::Fixed { lambda } if !(lambda > 0.0 && lambda.is_finite()) => {
                bad(format!("lambda must be positive, got {lambda}"))
            }
            LambdaRule::Expectation { draws } if draws < 100 => bad(format!("need at least 100 draws, got {draws}")),
            _ => PenaltySpec::elastic_net(1.0, self.gamma).validate(),
        }
    }

    /// The fixed i.i.d. N(0, 1) design of the experiment.
    pub fn design(&self) -> Result<DesignMatrix> {
        let mut r = rng::stream(self.seed, rng::STREAM_DESIGN);
        DesignMatrix::from_matrix(rng::normal_matrix(&mut r, self.n, self.p))
    }

    pub fn mean(&self, x: &DesignMatrix) -> DVector<f64> {
        x.values() * DVector::from_column_slice(&self.true_beta)
    }

    fn options(&self, mode: ConditioningMode) -> InferOptions {
        InferOptions {
            alpha: self.alpha,
            mode,
            sign_cap: self.sign_cap,
            solver: SolverOptions::default(),
        }
    }

    fn failure_budget(&self) -> usize {
        (FAILURE_BUDGET * self.replications as f64).floor() as usize
    }
}

/// Fixed pieces shared by every replication.
struct Setup {
    x: DesignMatrix,
    mu: DVector<f64>,
    sigma2: f64,
    penalty: PenaltySpec,
}

impl Setup {
    fn new(config: &ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let x = config.design()?;
        let mu = config.mean(&x);
        let sigma2 = config.sigma * config.sigma;
        let lambda = config.lambda_rule.resolve(&x, sigma2, config.seed)?;
        Ok(Self {
            x,
            mu,
            sigma2,
            penalty: PenaltySpec::elastic_net(lambda, config.gamma),
        })
    }

    fn draw(&self, config: &ExperimentConfig, rep: usize) -> (ChaCha8Rng, DVector<f64>) {
        let mut r = rng::stream(config.seed, rng::STREAM_REPLICATION + rep as u64);
        let y = &self.mu + rng::normal_vector(&mut r, self.x.n(), config.sigma);
        (r, y)
    }
}

/// One row per replication and selected coefficient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetRecord {
    pub replication: usize,
    pub model_size: usize,
    pub variable: usize,
    /// `e_j^T X_M^+ mu` for the realized model.
    pub truth: f64,
    pub estimate: f64,
    pub lower: f64,
    pub upper: f64,
    pub width: f64,
    pub covered: bool,
    /// Left pivot `F(eta^T y; truth + shift)`.
    pub pivot: f64,
    /// Distance from the estimate to the nearest truncation endpoint, in
    /// units of `sd(eta^T y)`.
    pub boundary_distance_sd: f64,
    pub sd_eta: f64,
}

#[derive(Debug, Clone, PartialEq)]
struct Replication {
    index: usize,
    model_size: usize,
    records: Vec<TargetRecord>,
    /// Pivot of one target picked independently of the data.
    single_pivot: Option<f64>,
}

fn record(rep: usize, k: usize, iv: &SelectiveInterval, mu: &DVector<f64>, shift_sd: f64) -> Result<TargetRecord> {
    let truth = iv.target.value(mu);
    let pivot = iv.pivot(truth + shift_sd * iv.sd_eta)?.left;
    Ok(TargetRecord {
        replication: rep,
        model_size: k,
        variable: iv.target.coef_index,
        truth,
        estimate: iv.estimate,
        lower: iv.lower,
        upper: iv.upper,
        width: iv.width(),
        covered: iv.covers(truth),
        pivot,
        boundary_distance_sd: iv.region.boundary_distance(iv.estimate) / iv.sd_eta,
        sd_eta: iv.sd_eta,
    })
}

fn replicate(config: &ExperimentConfig, setup: &Setup, rep: usize, shift_sd: f64) -> Result<Replication> {
    let (mut r, y) = setup.draw(config, rep);
    let out = pipeline::infer(&setup.x, &y, setup.penalty, setup.sigma2, &config.options(config.mode))?;
    let k = out.model.len();
    let mut records = Vec::with_capacity(k);
    for outcome in &out.outcomes {
        let iv = outcome.as_ref().map_err(|f| f.error.clone())?;
        records.push(record(rep, k, iv, &setup.mu, shift_sd)?);
    }
    let single_pivot = (k > 0).then(|| records[r.random_range(0..k)].pivot);
    Ok(Replication {
        index: rep,
        model_size: k,
        records,
        single_pivot,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub replication: usize,
    pub message: String,
}

/// Counts and sums that combine in any order.
#[derive(Debug, Clone, Default, PartialEq)]
struct Tally {
    replications: usize,
    selected: usize,
    targets: usize,
    covered: usize,
    /// Sum over replications of the non-coverage proportion.
    fcp_sum: f64,
    fcp_sq_sum: f64,
    widths: Vec<f64>,
}

impl Tally {
    fn add(&mut self, rep: &Replication) {
        self.replications += 1;
        if rep.model_size == 0 {
            return;
        }
        self.selected += 1;
        let misses = rep.records.iter().filter(|r| !r.covered).count();
        let fcp = misses as f64 / rep.model_size as f64;
        self.targets += rep.records.len();
        self.covered += rep.records.len() - misses;
        self.fcp_sum += fcp;
        self.fcp_sq_sum += fcp * fcp;
        self.widths.extend(rep.records.iter().map(|r| r.width));
    }
}

fn mean_se(sum: f64, sq_sum: f64, count: usize) -> (f64, f64) {
    if count == 0 {
        return (f64::NAN, f64::NAN);
    }
    let m = sum / count as f64;
    if count < 2 {
        return (m, f64::NAN);
    }
    let var = ((sq_sum - count as f64 * m * m) / (count - 1) as f64).max(0.0);
    (m, (var / count as f64).sqrt())
}

fn binomial(successes: usize, trials: usize) -> (f64, f64) {
    if trials == 0 {
        return (f64::NAN, f64::NAN);
    }
    let rate = successes as f64 / trials as f64;
    (rate, (rate * (1.0 - rate) / trials as f64).sqrt())
}

fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        f64::NAN
    } else {
        values.iter().sum::<f64>() / values.len() as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizeSummary {
    pub model_size: usize,
    pub replications: usize,
    pub targets: usize,
    pub coverage: f64,
    pub coverage_se: f64,
    /// Equal to pFCR within this stratum.
    pub fcr: f64,
    pub mean_width: f64,
    pub median_width: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniformityReport {
    /// One pivot per replication with a non-empty model, target chosen at
    /// random; these are independent draws.
    pub single: Option<KsResult>,
    /// Every selected coefficient of every replication. Pivots within a
    /// replication are dependent, so the p-value is only indicative.
    pub pooled: Option<KsResult>,
    /// Per variable, pooled over the replications that selected it.
    pub by_variable: BTreeMap<usize, KsResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub config: ExperimentConfig,
    pub lambda: f64,
    pub replications: usize,
    pub failures: usize,
    pub failure_budget: usize,
    /// False when the failure budget was exceeded.
    pub valid: bool,
    pub null_frequency: f64,
    pub selection_probability: f64,
    /// Replications with a non-empty model, the denominator of pFCR.
    pub selected_replications: usize,
    /// Sum of per-replication non-coverage proportions, the numerator of
    /// both FCR and pFCR.
    pub fcp_sum: f64,
    pub fcr: f64,
    pub fcr_se: f64,
    pub pfcr: f64,
    pub pfcr_se: f64,
    pub targets: usize,
    pub covered: usize,
    pub coverage: f64,
    pub coverage_se: f64,
    pub mean_width: f64,
    pub median_width: f64,
    pub uniformity: UniformityReport,
    pub by_model_size: Vec<SizeSummary>,
    pub failure_messages: Vec<Failure>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationRun {
    pub report: CoverageReport,
    pub records: Vec<TargetRecord>,
}

impl SimulationRun {
    pub fn check_budget(&self) -> Result<()> {
        if self.report.valid {
            Ok(())
        } else {
            Err(Error::FailureBudget {
                failures: self.report.failures,
                replications: self.report.config.replications,
                budget: self.report.failure_budget,
            })
        }
    }
}

fn uniformity(reps: &[Replication]) -> UniformityReport {
    let single: Vec<f64> = reps.iter().filter_map(|r| r.single_pivot).collect();
    let pooled: Vec<f64> = reps.iter().flat_map(|r| r.records.iter().map(|t| t.pivot)).collect();
    let mut per: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for t in reps.iter().flat_map(|r| &r.records) {
        per.entry(t.variable).or_default().push(t.pivot);
    }
    let ks = |v: &[f64]| (!v.is_empty()).then(|| ks_uniform(v));
    UniformityReport {
        single: ks(&single),
        pooled: ks(&pooled),
        by_variable: per
            .into_iter()
            .filter(|(_, v)| v.len() >= MIN_KS_SAMPLES)
            .map(|(j, v)| (j, ks_uniform(&v)))
            .collect(),
    }
}

fn summarize(config: &ExperimentConfig, lambda: f64, reps: &[Replication], failures: Vec<Failure>) -> CoverageReport {
    let mut all = Tally::default();
    let mut by_size: BTreeMap<usize, Tally> = BTreeMap::new();
    for rep in reps {
        all.add(rep);
        by_size.entry(rep.model_size).or_default().add(rep);
    }
    let used = all.replications;
    let (fcr, fcr_se) = mean_se(all.fcp_sum, all.fcp_sq_sum, used);
    let (pfcr, pfcr_se) = mean_se(all.fcp_sum, all.fcp_sq_sum, all.selected);
    let (coverage, coverage_se) = binomial(all.covered, all.targets);
    let budget = config.failure_budget();
    let n_failures = failures.len();
    CoverageReport {
        config: config.clone(),
        lambda,
        replications: used,
        failures: n_failures,
        failure_budget: budget,
        valid: n_failures <= budget,
        null_frequency: (used - all.selected) as f64 / used.max(1) as f64,
        selection_probability: all.selected as f64 / used.max(1) as f64,
        selected_replications: all.selected,
        fcp_sum: all.fcp_sum,
        fcr,
        fcr_se,
        pfcr,
        pfcr_se,
        targets: all.targets,
        covered: all.covered,
        coverage,
        coverage_se,
        mean_width: mean(&all.widths),
        median_width: median(&all.widths),
        uniformity: uniformity(reps),
        by_model_size: by_size
            .into_iter()
            .map(|(k, t)| {
                let (coverage, coverage_se) = binomial(t.covered, t.targets);
                SizeSummary {
                    model_size: k,
                    replications: t.replications,
                    targets: t.targets,
                    coverage,
                    coverage_se,
                    fcr: if k == 0 { 0.0 } else { t.fcp_sum / t.replications as f64 },
                    mean_width: mean(&t.widths),
                    median_width: median(&t.widths),
                }
            })
            .collect(),
        failure_messages: failures.into_iter().take(MAX_FAILURE_MESSAGES).collect(),
    }
}

fn split_outcomes<T>(outcomes: Vec<(usize, Result<T>)>) -> (Vec<T>, Vec<Failure>) {
    let mut ok = Vec::new();
    let mut failed = Vec::new();
    for (index, outcome) in outcomes {
        match outcome {
            Ok(v) => ok.push(v),
            Err(e) => failed.push(Failure {
                replication: index,
                message: e.to_string(),
            }),
        }
    }
    (ok, failed)
}

/// Runs every replication and aggregates, whatever the failure count.
/// Pivots are evaluated at the truth shifted by `shift_sd * sd(eta^T y)`.
pub fn simulate(config: &ExperimentConfig, shift_sd: f64) -> Result<SimulationRun> {
    let setup = Setup::new(config)?;
    let outcomes = parallel::map((0..config.replications).collect(), |rep| {
        (rep, replicate(config, &setup, rep, shift_sd))
    });
    let (reps, failures) = split_outcomes(outcomes);
    for f in &failures {
        log::debug!("replication {} failed: {}", f.replication, f.message);
    }
    let report = summarize(config, setup.penalty.lambda, &reps, failures);
    let records = reps.into_iter().flat_map(|r| r.records).collect();
    Ok(SimulationRun { report, records })
}

/// Coverage, FCR and pFCR of the configured intervals. Fails when more
/// than [`FAILURE_BUDGET`] of the replications fail.
pub fn run_coverage(config: &ExperimentConfig) -> Result<SimulationRun> {
    let run = simulate(config, 0.0)?;
    run.check_budget()?;
    Ok(run)
}

/// KS tests of the pivots at `truth + shift_sd * sd(eta^T y)`; a shift of
/// zero should look uniform.
pub fn run_pivot_uniformity(config: &ExperimentConfig, shift_sd: f64) -> Result<UniformityReport> {
    let run = simulate(config, shift_sd)?;
    run.check_budget()?;
    Ok(run.report.uniformity)
}

/// Widths of the different intervals for one coefficient of the model
/// selected on the full data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WidthRecord {
    pub replication: usize,
    pub model_size: usize,
    pub variable: usize,
    pub truth: f64,
    pub estimate: f64,
    pub sign_width: f64,
    /// Missing when the model exceeds the sign-pattern cap.
    pub model_width: Option<f64>,
    pub naive_width: f64,
    pub naive_covered: bool,
    pub boundary_distance_sd: f64,
}

/// One coefficient of the model selected on the first half.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitRecord {
    pub replication: usize,
    pub model_size: usize,
    pub variable: usize,
    pub split_width: f64,
    /// OLS width for the same model and coefficient using all rows.
    pub full_ols_width: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WidthSummary {
    pub config: ExperimentConfig,
    pub lambda: f64,
    pub replications: usize,
    pub failures: usize,
    pub failure_budget: usize,
    pub valid: bool,
    pub mean_sign_width: f64,
    pub median_sign_width: f64,
    pub mean_model_width: f64,
    pub median_model_width: f64,
    pub mean_naive_width: f64,
    pub naive_targets: usize,
    pub naive_coverage: f64,
    pub naive_coverage_se: f64,
    /// Median sign/naive width ratio over estimates at least half a
    /// standard deviation inside both truncation endpoints.
    pub interior_median_ratio: f64,
    pub interior_targets: usize,
    pub split_targets: usize,
    pub mean_split_width: f64,
    pub mean_full_ols_width: f64,
    /// `mean_split_width / mean_full_ols_width`.
    pub split_inflation: f64,
    pub failure_messages: Vec<Failure>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WidthRun {
    pub summary: WidthSummary,
    pub records: Vec<WidthRecord>,
    pub split_records: Vec<SplitRecord>,
}

impl WidthRun {
    pub fn check_budget(&self) -> Result<()> {
        if self.summary.valid {
            Ok(())
        } else {
            Err(Error::FailureBudget {
                failures: self.summary.failures,
                replications: self.summary.config.replications,
                budget: self.summary.failure_budget,
            })
        }
    }
}

fn width_replication(
    config: &ExperimentConfig,
    setup: &Setup,
    rep: usize,
) -> Result<(Vec<WidthRecord>, Vec<SplitRecord>)> {
    let (mut r, y) = setup.draw(config, rep);
    let x = &setup.x;
    let sign = pipeline::infer(x, &y, setup.penalty, setup.sigma2, &config.options(ConditioningMode::Sign))?;
    let k = sign.model.len();
    let model = if k > 0 && k <= config.sign_cap {
        Some(pipeline::infer(x, &y, setup.penalty, setup.sigma2, &config.options(ConditioningMode::Model))?)
    } else {
        None
    };
    let naive = pipeline::naive_intervals(x, &y, &sign.model, setup.sigma2, config.alpha)?;
    let mut records = Vec::with_capacity(k);
    for (pos, outcome) in sign.outcomes.iter().enumerate() {
        let iv = outcome.as_ref().map_err(|f| f.error.clone())?;
        let model_width = match &model {
            Some(m) => Some(m.outcomes[pos].as_ref().map_err(|f| f.error.clone())?.width()),
            None => None,
        };
        let truth = iv.target.value(&setup.mu);
        records.push(WidthRecord {
            replication: rep,
            model_size: k,
            variable: iv.target.coef_index,
            truth,
            estimate: iv.estimate,
            sign_width: iv.width(),
            model_width,
            naive_width: naive[pos].width(),
            naive_covered: naive[pos].covers(truth),
            boundary_distance_sd: iv.region.boundary_distance(iv.estimate) / iv.sd_eta,
        });
    }

    let sigma2 = setup.sigma2;
    let rule = config.lambda_rule;
    let gamma = config.gamma;
    let split_seed: u64 = r.random();
    let split = pipeline::data_split_with(
        x,
        &y,
        |half| Ok(PenaltySpec::elastic_net(rule.resolve(half, sigma2, split_seed)?, gamma)),
        sigma2,
        config.alpha,
        &mut r,
        &SolverOptions::default(),
    )?;
    let full = pipeline::naive_intervals(x, &y, &split.model, sigma2, config.alpha)?;
    let split_records = split
        .intervals
        .iter()
        .zip(&full)
        .map(|(s, f)| SplitRecord {
            replication: rep,
            model_size: split.model.len(),
            variable: s.target.coef_index,
            split_width: s.width(),
            full_ols_width: f.width(),
        })
        .collect();
    Ok((records, split_records))
}

/// Sign-conditioned, model-conditioned, naive OLS and data-splitting
/// widths on the same replications.
pub fn run_width_comparison(config: &ExperimentConfig) -> Result<WidthRun> {
    let setup = Setup::new(config)?;
    let outcomes = parallel::map((0..config.replications).collect(), |rep| {
        (rep, width_replication(config, &setup, rep))
    });
    let (ok, failures) = split_outcomes(outcomes);
    let replications = ok.len();
    let (records, split_records): (Vec<_>, Vec<_>) = ok.into_iter().unzip();
    let records: Vec<WidthRecord> = records.into_iter().flatten().collect();
    let split_records: Vec<SplitRecord> = split_records.into_iter().flatten().collect();

    let sign: Vec<f64> = records.iter().map(|r| r.sign_width).collect();
    let model: Vec<f64> = records.iter().filter_map(|r| r.model_width).collect();
    let naive: Vec<f64> = records.iter().map(|r| r.naive_width).collect();
    let naive_covered = records.iter().filter(|r| r.naive_covered).count();
    let (naive_coverage, naive_coverage_se) = binomial(naive_covered, records.len());
    let interior: Vec<f64> = records
        .iter()
        .filter(|r| r.boundary_distance_sd >= 0.5)
        .map(|r| r.sign_width / r.naive_width)
        .collect();
    let split_w: Vec<f64> = split_records.iter().map(|r| r.split_width).collect();
    let full_w: Vec<f64> = split_records.iter().map(|r| r.full_ols_width).collect();
    let budget = config.failure_budget();
    let summary = WidthSummary {
        config: config.clone(),
        lambda: setup.penalty.lambda,
        replications,
        failures: failures.len(),
        failure_budget: budget,
        valid: failures.len() <= budget,
        mean_sign_width: mean(&sign),
        median_sign_width: median(&sign),
        mean_model_width: mean(&model),
        median_model_width: median(&model),
        mean_naive_width: mean(&naive),
        naive_targets: records.len(),
        naive_coverage,
        naive_coverage_se,
        interior_median_ratio: median(&interior),
        interior_targets: interior.len(),
        split_targets: split_records.len(),
        mean_split_width: mean(&split_w),
        mean_full_ols_width: mean(&full_w),
        split_inflation: mean(&split_w) / mean(&full_w),
        failure_messages: failures.into_iter().take(MAX_FAILURE_MESSAGES).collect(),
    };
    Ok(WidthRun {
        summary,
        records,
        split_records,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(reps: usize) -> ExperimentConfig {
        let mut c = ExperimentConfig::sparse(10, 5, 2, 1.0, 1.0, LambdaRule::Fixed { lambda: 2.0 }, 7);
        c.replications = reps;
        c
    }

    #[test]
    fn zero_replications_rejected() {
        assert!(matches!(run_coverage(&small(0)), Err(Error::Validation(_))));
    }

    #[test]
    fn fcr_identity_holds_on_counts() {
        let run = run_coverage(&small(200)).unwrap();
        let r = &run.report;
        assert_eq!(r.replications + r.failures, 200);
        let lhs = r.fcr;
        let rhs = r.pfcr * r.selection_probability;
        assert!((lhs - rhs).abs() <= 4.0 * f64::EPSILON * lhs.max(1e-300), "{lhs} vs {rhs}");
        assert!(r.fcr <= r.pfcr);
        assert!((r.null_frequency + r.selection_probability - 1.0).abs() < 1e-15);
    }

    #[test]
    fn results_do_not_depend_on_order() {
        let a = run_coverage(&small(50)).unwrap();
        let b = run_coverage(&small(50)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn records_use_realized_targets() {
        let cfg = small(20);
        let run = run_coverage(&cfg).unwrap();
        let x = cfg.design().unwrap();
        let mu = cfg.mean(&x);
        for rec in run.records.iter().filter(|r| r.model_size == 1) {
            let col = x.values().column(rec.variable);
            let truth = col.dot(&mu) / col.norm_squared();
            assert!((truth - rec.truth).abs() < 1e-10);
        }
    }

    #[test]
    fn median_and_mean() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
        assert!(median(&[]).is_nan());
        assert_eq!(mean(&[1.0, 2.0]), 1.5);
    }
}
