//! Bindings for the browser demo in `www/`.
//!
//! Each exported function has a plain Rust twin returning `Result<_, String>`
//! so the logic can be tested natively; the `#[wasm_bindgen]` wrappers only
//! convert errors.

use selinf::lasso::PenaltySpec;
use selinf::pipeline::{self, LambdaRule};
use selinf::sim::ExperimentConfig;
use selinf::truncnorm::{tn_interval_bounds, tn_log_mass, tn_pivot, TruncationRegion};
use selinf::{rng, ConditioningMode, InferOptions};
use serde::Serialize;
use wasm_bindgen::prelude::*;

const MAX_POINTS: usize = 2000;
const MAX_N: usize = 500;
const MAX_P: usize = 100;
/// Half-width of the plotted range around the mean when the region is
/// unbounded.
const PLOT_SPAN_SD: f64 = 6.0;

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn check_points(points: usize) -> Result<(), String> {
    if !(2..=MAX_POINTS).contains(&points) {
        return Err(format!("points must lie in [2, {MAX_POINTS}], got {points}"));
    }
    Ok(())
}

/// `[x0, L0, U0, x1, L1, U1, ...]` for a unit-variance observation truncated
/// to `[a, b]`, on `points` values evenly spaced inside the interval.
pub fn interval_curve(a: f64, b: f64, alpha: f64, points: usize) -> Result<Vec<f64>, String> {
    check_points(points)?;
    if !(a.is_finite() && b.is_finite()) {
        return Err("truncation points must be finite".into());
    }
    let region = TruncationRegion::single(a, b).map_err(err)?;
    let mut out = Vec::with_capacity(3 * points);
    for i in 0..points {
        let x = a + (b - a) * (i as f64 + 0.5) / points as f64;
        let (lo, hi) = tn_interval_bounds(x, 1.0, &region, alpha).map_err(err)?;
        out.extend([x, lo, hi]);
    }
    Ok(out)
}

/// `[x0, f0, x1, f1, ...]`, the density of `N(mu, 1)` truncated to `[a, b]`.
pub fn density_curve(mu: f64, a: f64, b: f64, points: usize) -> Result<Vec<f64>, String> {
    check_points(points)?;
    let region = TruncationRegion::single(a, b).map_err(err)?;
    let log_mass = tn_log_mass(mu, 1.0, &region).map_err(err)?;
    let lo = a.max(mu - PLOT_SPAN_SD);
    let hi = b.min(mu + PLOT_SPAN_SD);
    if !(lo < hi) {
        return Err("nothing to plot: the region is far from the mean".into());
    }
    let mut out = Vec::with_capacity(2 * points);
    for i in 0..points {
        let x = lo + (hi - lo) * i as f64 / (points - 1) as f64;
        let z = x - mu;
        let log_f = -0.5 * z * z - 0.5 * (2.0 * std::f64::consts::PI).ln() - log_mass;
        out.extend([x, log_f.exp()]);
    }
    Ok(out)
}

/// `F(x)` for `N(mu, 1)` truncated to `[a, b]`.
pub fn pivot(x: f64, mu: f64, a: f64, b: f64) -> Result<f64, String> {
    let region = TruncationRegion::single(a, b).map_err(err)?;
    if !region.contains(x) {
        return Err(format!("x = {x} lies outside [{a}, {b}]"));
    }
    Ok(tn_pivot(x, mu, 1.0, &region).map_err(err)?.left)
}

#[derive(Debug, Serialize)]
pub struct DemoInterval {
    pub name: String,
    pub truth: f64,
    pub estimate: f64,
    pub lower: f64,
    pub upper: f64,
    pub p_value: f64,
    pub naive_lower: f64,
    pub naive_upper: f64,
}

#[derive(Debug, Serialize)]
pub struct Demo {
    pub lambda: f64,
    pub model: Vec<usize>,
    pub signs: Vec<i8>,
    pub true_beta: Vec<f64>,
    pub intervals: Vec<DemoInterval>,
    /// Coefficients whose interval failed, with the reason.
    pub failures: Vec<(String, String)>,
}

#[derive(Debug, Clone, Copy)]
pub struct DemoSettings {
    pub n: usize,
    pub p: usize,
    pub k: usize,
    pub strength: f64,
    pub lambda: f64,
    pub alpha: f64,
    pub model_mode: bool,
    pub seed: u64,
    /// Which noise draw to use on the fixed design.
    pub draw: u64,
}

/// Simulates a sparse regression, fits the lasso and returns selective and
/// naive intervals for the selected coefficients.
pub fn lasso_demo(s: DemoSettings) -> Result<Demo, String> {
    if s.n == 0 || s.n > MAX_N || s.p == 0 || s.p > MAX_P {
        return Err(format!("need 1 <= n <= {MAX_N} and 1 <= p <= {MAX_P}"));
    }
    if s.k > s.p {
        return Err(format!("k = {} exceeds p = {}", s.k, s.p));
    }
    let config = ExperimentConfig::sparse(s.n, s.p, s.k, s.strength, 1.0, LambdaRule::Fixed { lambda: s.lambda }, s.seed);
    let x = config.design().map_err(err)?;
    let mu = config.mean(&x);
    let mut r = rng::stream(s.seed, rng::STREAM_REPLICATION + s.draw);
    let y = &mu + rng::normal_vector(&mut r, s.n, 1.0);
    let opts = InferOptions {
        alpha: s.alpha,
        mode: if s.model_mode {
            ConditioningMode::Model
        } else {
            ConditioningMode::Sign
        },
        ..Default::default()
    };
    let out = pipeline::infer(&x, &y, PenaltySpec::lasso(s.lambda), 1.0, &opts).map_err(err)?;
    let naive = pipeline::naive_intervals(&x, &y, &out.model, 1.0, s.alpha).map_err(err)?;
    let intervals = out
        .intervals()
        .map(|iv| {
            let nv = &naive[iv.target.position];
            DemoInterval {
                name: iv.target.name.clone(),
                truth: iv.target.value(&mu),
                estimate: iv.estimate,
                lower: iv.lower,
                upper: iv.upper,
                p_value: iv.pivot_at_zero,
                naive_lower: nv.lower,
                naive_upper: nv.upper,
            }
        })
        .collect();
    Ok(Demo {
        lambda: s.lambda,
        model: out.model.clone(),
        signs: out.signs.clone(),
        true_beta: config.true_beta,
        intervals,
        failures: out.failures().map(|f| (f.name.clone(), f.error.to_string())).collect(),
    })
}

fn js(e: String) -> JsError {
    JsError::new(&e)
}

#[wasm_bindgen(js_name = intervalCurve)]
pub fn interval_curve_js(a: f64, b: f64, alpha: f64, points: usize) -> Result<Vec<f64>, JsError> {
    interval_curve(a, b, alpha, points).map_err(js)
}

#[wasm_bindgen(js_name = densityCurve)]
pub fn density_curve_js(mu: f64, a: f64, b: f64, points: usize) -> Result<Vec<f64>, JsError> {
    density_curve(mu, a, b, points).map_err(js)
}

#[wasm_bindgen(js_name = pivot)]
pub fn pivot_js(x: f64, mu: f64, a: f64, b: f64) -> Result<f64, JsError> {
    pivot(x, mu, a, b).map_err(js)
}

/// JSON text of a [`Demo`]. Infinite endpoints are written as `null`.
#[wasm_bindgen(js_name = lassoDemo)]
#[allow(clippy::too_many_arguments)]
pub fn lasso_demo_js(
    n: usize,
    p: usize,
    k: usize,
    strength: f64,
    lambda: f64,
    alpha: f64,
    model_mode: bool,
    seed: u32,
    draw: u32,
) -> Result<String, JsError> {
    let demo = lasso_demo(DemoSettings {
        n,
        p,
        k,
        strength,
        lambda,
        alpha,
        model_mode,
        seed: seed as u64,
        draw: draw as u64,
    })
    .map_err(js)?;
    serde_json::to_string(&demo).map_err(|e| js(e.to_string()))
}
