//! Gaussian laws truncated to a finite union of disjoint intervals.
//!
//! All masses are carried as logarithms (see [`crate::special`]). The CDF
//! is formed as `below / (below + above)` from the separately accumulated
//! log masses on either side of `x`, so both `F` and `1 - F` keep full
//! relative precision.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::{log_add_exp, log_gauss_mass};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lower: f64,
    pub upper: f64,
}

impl Interval {
    pub fn new(lower: f64, upper: f64) -> Self {
        Self { lower, upper }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }
}

/// Sorted, pairwise disjoint, nonempty intervals plus the `V0` slack of the
/// line restriction they came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruncationRegion {
    intervals: Vec<Interval>,
    v0_slack: f64,
}

impl TruncationRegion {
    pub fn new(intervals: Vec<Interval>, v0_slack: f64) -> Result<Self> {
        if intervals.is_empty() {
            return Err(Error::Validation("truncation region needs at least one interval".into()));
        }
        for iv in &intervals {
            if iv.lower.is_nan() || iv.upper.is_nan() || !(iv.lower < iv.upper) {
                return Err(Error::Validation(format!("empty interval [{}, {}]", iv.lower, iv.upper)));
            }
        }
        if intervals.windows(2).any(|w| !(w[0].upper < w[1].lower)) {
            return Err(Error::Validation("intervals must be sorted and disjoint".into()));
        }
        Ok(Self { intervals, v0_slack })
    }

    pub fn single(lower: f64, upper: f64) -> Result<Self> {
        Self::new(vec![Interval::new(lower, upper)], f64::INFINITY)
    }

    pub fn real_line() -> Self {
        Self {
            intervals: vec![Interval::new(f64::NEG_INFINITY, f64::INFINITY)],
            v0_slack: f64::INFINITY,
        }
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn v0_slack(&self) -> f64 {
        self.v0_slack
    }

    pub fn lower(&self) -> f64 {
        self.intervals[0].lower
    }

    pub fn upper(&self) -> f64 {
        self.intervals[self.intervals.len() - 1].upper
    }

    pub fn contains(&self, x: f64) -> bool {
        self.intervals.iter().any(|iv| iv.contains(x))
    }

    /// Distance from `x` to the nearest point of the region.
    pub fn distance(&self, x: f64) -> f64 {
        self.intervals
            .iter()
            .map(|iv| {
                if x < iv.lower {
                    iv.lower - x
                } else if x > iv.upper {
                    x - iv.upper
                } else {
                    0.0
                }
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Distance from `x` to the nearest finite endpoint.
    pub fn boundary_distance(&self, x: f64) -> f64 {
        self.intervals
            .iter()
            .flat_map(|iv| [iv.lower, iv.upper])
            .filter(|e| e.is_finite())
            .map(|e| (x - e).abs())
            .fold(f64::INFINITY, f64::min)
    }

    /// Moves `x` into the region by at most `max_shift`, landing `margin`
    /// inside the nearest interval. Returns `None` if `x` is farther out.
    pub fn clamp(&self, x: f64, max_shift: f64, margin: f64) -> Option<f64> {
        let iv = self.intervals.iter().min_by(|a, b| {
            let da = TruncationRegion::single_distance(a, x);
            let db = TruncationRegion::single_distance(b, x);
            da.total_cmp(&db)
        })?;
        let inner_lo = iv.lower + margin.min(0.5 * (iv.upper - iv.lower));
        let inner_hi = iv.upper - margin.min(0.5 * (iv.upper - iv.lower));
        let clamped = x.clamp(inner_lo, inner_hi);
        ((clamped - x).abs() <= max_shift).then_some(clamped)
    }

    fn single_distance(iv: &Interval, x: f64) -> f64 {
        (iv.lower - x).max(x - iv.upper).max(0.0)
    }
}

/// Log masses of the truncated law on either side of `x`.
fn split_log_mass(x: f64, mu: f64, sigma: f64, region: &TruncationRegion) -> (f64, f64) {
    let std = |v: f64| (v - mu) / sigma;
    let xs = std(x);
    let mut below = f64::NEG_INFINITY;
    let mut above = f64::NEG_INFINITY;
    for iv in region.intervals() {
        let (lo, hi) = (std(iv.lower), std(iv.upper));
        if iv.upper <= x {
            below = log_add_exp(below, log_gauss_mass(lo, hi, (iv.upper - iv.lower) / sigma));
        } else if iv.lower >= x {
            above = log_add_exp(above, log_gauss_mass(lo, hi, (iv.upper - iv.lower) / sigma));
        } else {
            below = log_add_exp(below, log_gauss_mass(lo, xs, (x - iv.lower) / sigma));
            above = log_add_exp(above, log_gauss_mass(xs, hi, (iv.upper - x) / sigma));
        }
    }
    (below, above)
}

fn check_scale(mu: f64, sigma2: f64) -> Result<f64> {
    if !(sigma2 > 0.0 && sigma2.is_finite()) {
        return Err(Error::Validation(format!("variance must be positive and finite, got {sigma2}")));
    }
    if !mu.is_finite() {
        return Err(Error::Validation(format!("mean must be finite, got {mu}")));
    }
    Ok(sigma2.sqrt())
}

/// `(F(x), 1 - F(x))` for `N(mu, sigma2)` truncated to `region`.
pub fn tn_cdf_pair(x: f64, mu: f64, sigma2: f64, region: &TruncationRegion) -> Result<(f64, f64)> {
    let sigma = check_scale(mu, sigma2)?;
    if x.is_nan() {
        return Err(Error::Validation("x is NaN".into()));
    }
    let (below, above) = split_log_mass(x, mu, sigma, region);
    if below == f64::NEG_INFINITY && above == f64::NEG_INFINITY || below.is_nan() || above.is_nan() {
        return Err(Error::DegenerateRegion);
    }
    // F = 1 / (1 + exp(above - below))
    let d = above - below;
    let cdf = if d == f64::INFINITY { 0.0 } else { 1.0 / (1.0 + d.exp()) };
    let sf = if d == f64::NEG_INFINITY { 0.0 } else { 1.0 / (1.0 + (-d).exp()) };
    Ok((cdf, sf))
}

/// `P(Z <= x | Z in region)` for `Z ~ N(mu, sigma2)`.
pub fn tn_cdf(x: f64, mu: f64, sigma2: f64, region: &TruncationRegion) -> Result<f64> {
    tn_cdf_pair(x, mu, sigma2, region).map(|(f, _)| f)
}

/// Total log mass of the region under `N(mu, sigma2)`.
pub fn tn_log_mass(mu: f64, sigma2: f64, region: &TruncationRegion) -> Result<f64> {
    let sigma = check_scale(mu, sigma2)?;
    let (below, above) = split_log_mass(region.lower(), mu, sigma, region);
    Ok(log_add_exp(below, above))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pivot {
    /// `F(x)` under the null mean.
    pub left: f64,
    /// `2 min(F, 1 - F)`.
    pub two_sided: f64,
}

pub fn tn_pivot(x: f64, mu0: f64, sigma2: f64, region: &TruncationRegion) -> Result<Pivot> {
    let (cdf, sf) = tn_cdf_pair(x, mu0, sigma2, region)?;
    Ok(Pivot {
        left: cdf,
        two_sided: (2.0 * cdf.min(sf)).min(1.0),
    })
}

/// Half-width of the initial search bracket, in standard deviations.
pub const BRACKET_START_SD: f64 = 10.0;
/// Largest half-width tried before giving up. Estimates within a few
/// thousandths of a standard deviation of an endpoint need means several
/// thousand standard deviations away, so the cap is generous.
pub const BRACKET_MAX_SD: f64 = 655_360.0;
pub const BISECTION_MAX_ITER: usize = 200;
pub const PIVOT_RESIDUAL_TOL: f64 = 1e-8;

/// Mean at which the truncated CDF of `x` equals `target`.
///
/// The CDF is strictly decreasing in the mean, so bisection on a bracket
/// that straddles `target` is guaranteed to converge.
pub fn solve_mean(x: f64, sigma2: f64, region: &TruncationRegion, target: f64) -> Result<f64> {
    let sigma = check_scale(0.0, sigma2)?;
    // G(mu) = F(mu) - target, decreasing. Compare on the smaller tail.
    let excess = |mu: f64| -> Result<f64> {
        let (cdf, sf) = tn_cdf_pair(x, mu, sigma2, region)?;
        Ok(if target <= 0.5 { cdf - target } else { (1.0 - target) - sf })
    };
    let mut half = BRACKET_START_SD * sigma;
    let (mut lo, mut hi);
    loop {
        lo = x - half;
        hi = x + half;
        let g_lo = excess(lo)?;
        let g_hi = excess(hi)?;
        if g_lo >= 0.0 && g_hi <= 0.0 {
            break;
        }
        if half >= BRACKET_MAX_SD * sigma {
            return Err(Error::NotBracketed {
                target,
                pivot_low: tn_cdf(x, hi, sigma2, region)?,
                pivot_high: tn_cdf(x, lo, sigma2, region)?,
            });
        }
        half *= 2.0;
    }
    for _ in 0..BISECTION_MAX_ITER {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if excess(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-14 * (mid.abs() + sigma) {
            break;
        }
    }
    let mid = 0.5 * (lo + hi);
    let residual = excess(mid)?.abs();
    if residual > PIVOT_RESIDUAL_TOL {
        return Err(Error::Inconsistent(format!(
            "bisection for level {target} stopped with pivot residual {residual:e}"
        )));
    }
    Ok(mid)
}

/// Equal-tailed `1 - alpha` interval `(L, U)` for the mean of a truncated
/// Gaussian observed at `x`: `F_L(x) = 1 - alpha/2`, `F_U(x) = alpha/2`.
pub fn tn_interval_bounds(x: f64, sigma2: f64, region: &TruncationRegion, alpha: f64) -> Result<(f64, f64)> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Validation(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    if !x.is_finite() || !region.contains(x) {
        return Err(Error::Validation(format!("observation {x} lies outside the truncation region")));
    }
    let lower = solve_mean(x, sigma2, region, 1.0 - 0.5 * alpha)?;
    let upper = solve_mean(x, sigma2, region, 0.5 * alpha)?;
    if !(lower < upper) {
        return Err(Error::Inconsistent(format!("interval endpoints out of order: {lower} >= {upper}")));
    }
    Ok((lower, upper))
}
