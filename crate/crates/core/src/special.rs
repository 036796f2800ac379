//! Gaussian special functions evaluated in log space.
//!
//! Tail probabilities are expressed through the scaled complementary error
//! function `erfcx(x) = exp(x^2) erfc(x)`, which stays O(1/x) where `erfc`
//! itself underflows. Differences of normal CDFs are formed from ratios of
//! `erfcx` values so that intervals deep in either tail keep full relative
//! precision.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::sync::OnceLock;

const FRAC_1_SQRT_PI: f64 = 0.564_189_583_547_756_3;

/// Below this argument `erfcx` is formed as `exp(x^2) * erfc(x)`.
const ERFCX_CF_CUTOFF: f64 = 6.0;

/// `exp(x^2)` with the rounding error of `x*x` folded back in.
fn exp_square(x: f64) -> f64 {
    let hi = x * x;
    let lo = x.mul_add(x, -hi);
    hi.exp() * (1.0 + lo)
}

/// Scaled complementary error function `exp(x^2) erfc(x)`.
pub fn erfcx(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x < 0.0 {
        // erfc(x) = 2 - erfc(-x)
        if x < -26.7 {
            return f64::INFINITY;
        }
        return 2.0 * exp_square(x) - erfcx(-x);
    }
    if x < ERFCX_CF_CUTOFF {
        return exp_square(x) * libm::erfc(x);
    }
    if x.is_infinite() {
        return 0.0;
    }
    if x > 1e8 {
        // continued fraction collapses to its leading term
        return FRAC_1_SQRT_PI / x;
    }
    // erfc(x) = exp(-x^2)/sqrt(pi) / (x + (1/2)/(x + (2/2)/(x + (3/2)/(x + ...))))
    // evaluated with the modified Lentz algorithm.
    let tiny = 1e-300;
    let mut f = x;
    let mut c = x;
    let mut d = 0.0;
    for k in 1..500 {
        let a = 0.5 * k as f64;
        d = x + a * d;
        if d.abs() < tiny {
            d = tiny;
        }
        d = 1.0 / d;
        c = x + a / c;
        if c.abs() < tiny {
            c = tiny;
        }
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    FRAC_1_SQRT_PI / f
}

/// Standard normal CDF.
pub fn ndtr(t: f64) -> f64 {
    0.5 * libm::erfc(-t * FRAC_1_SQRT_2)
}

/// `ln Phi(t)`, accurate for arbitrarily negative `t`.
pub fn log_ndtr(t: f64) -> f64 {
    if t.is_nan() {
        return f64::NAN;
    }
    if t == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if t < 0.0 {
        let u = -t * FRAC_1_SQRT_2;
        (0.5 * erfcx(u)).ln() - 0.5 * t * t
    } else {
        (-0.5 * libm::erfc(t * FRAC_1_SQRT_2)).ln_1p()
    }
}

/// `ln(1 - Phi(t))`, the log upper tail.
pub fn log_ndtr_upper(t: f64) -> f64 {
    log_ndtr(-t)
}

/// `ln(Phi(hi) - Phi(lo))` for standardized endpoints `lo < hi`.
///
/// `width` must be `hi - lo` computed from the unstandardized endpoints when
/// available, so that narrow intervals far from the mean keep their width
/// exactly. Returns `-inf` for empty intervals.
pub fn log_gauss_mass(lo: f64, hi: f64, width: f64) -> f64 {
    if !(hi > lo) || !(width > 0.0) {
        return f64::NEG_INFINITY;
    }
    if hi <= 0.0 {
        return log_gauss_mass(-hi, -lo, width);
    }
    if lo < 0.0 {
        // straddles the mean: both halves are positive, no cancellation
        let upper = if hi.is_infinite() { 1.0 } else { libm::erf(hi * FRAC_1_SQRT_2) };
        let lower = if lo.is_infinite() { 1.0 } else { libm::erf(-lo * FRAC_1_SQRT_2) };
        return (0.5 * (upper + lower)).ln();
    }
    // 0 <= lo < hi
    if hi.is_finite() && width * hi.max(1.0) < 0.5 {
        return log_narrow_mass(lo, width);
    }
    let log_q_lo = log_ndtr_upper(lo);
    if hi.is_infinite() {
        return log_q_lo;
    }
    // Q(hi)/Q(lo) through erfcx so the Gaussian factors cancel analytically.
    let log_ratio = (erfcx(hi * FRAC_1_SQRT_2) / erfcx(lo * FRAC_1_SQRT_2)).ln()
        - 0.5 * width * (hi + lo);
    log_q_lo + (-log_ratio.exp_m1()).ln()
}

/// `ln int_lo^{lo+width} phi(t) dt` for a short interval with `lo >= 0`.
fn log_narrow_mass(lo: f64, width: f64) -> f64 {
    // phi(lo + s) = phi(lo) exp(-s (2 lo + s) / 2); the exponent is O(1) so a
    // fixed Gauss-Legendre rule is exact to rounding.
    let (nodes, weights) = gauss_legendre_20();
    let half = 0.5 * width;
    let integral: f64 = nodes
        .iter()
        .zip(weights)
        .map(|(&node, &weight)| {
            let s = half * (node + 1.0);
            weight * (-0.5 * s * (2.0 * lo + s)).exp()
        })
        .sum::<f64>()
        * half;
    -0.5 * lo * lo - 0.5 * (2.0 * PI).ln() + integral.ln()
}

fn gauss_legendre_20() -> (&'static [f64], &'static [f64]) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    let rule = RULE.get_or_init(|| gauss_legendre(20));
    (&rule.0, &rule.1)
}

/// Nodes and weights of the `n`-point Gauss-Legendre rule on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let k = k as f64;
                let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { x } else { p1 };
            let pn1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * pn - pn1) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// `ln(exp(a) + exp(b))` tolerating infinite arguments.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// Standard normal quantile.
///
/// Acklam's rational approximation followed by one Halley step against
/// [`ndtr`], good to a few ulp over (0, 1).
pub fn ndtri(p: f64) -> f64 {
    if !(0.0..=1.0).contains(&p) || p.is_nan() {
        return f64::NAN;
    }
    if p == 0.0 {
        return f64::NEG_INFINITY;
    }
    if p == 1.0 {
        return f64::INFINITY;
    }
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383577518672690e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    const P_LOW: f64 = 0.02425;
    let x = if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    // Halley refinement; the residual is taken on the smaller tail.
    let e = if x < 0.0 {
        ndtr(x) - p
    } else {
        (1.0 - p) - ndtr(-x)
    };
    let u = e * (2.0 * PI).sqrt() * (0.5 * x * x).exp();
    x - u / (1.0 + 0.5 * x * u)
}
