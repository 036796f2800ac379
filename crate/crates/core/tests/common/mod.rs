//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::path::PathBuf;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use selinf::truncnorm::TruncationRegion;
use selinf::DesignMatrix;

// Gauss-Kronrod 7-15 nodes and weights.
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for i in 0..7 {
        let d = h * XGK[i];
        let s = f(c - d) + f(c + d);
        k += WGK[i] * s;
        if i % 2 == 1 {
            g += WG[i / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Adaptive quadrature of a positive integrand with per-panel relative
/// error control. The Kronrod estimate is far more accurate than the
/// Gauss-Kronrod difference used as the error bound.
pub fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    fn rec<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, depth: u32) -> f64 {
        let (k, err) = gk15(f, a, b);
        if err <= 1e-13 * k.abs() || k.abs() < 1e-300 || depth >= 40 {
            return k;
        }
        let m = 0.5 * (a + b);
        rec(f, a, m, depth + 1) + rec(f, m, b, depth + 1)
    }
    if !(b > a) {
        return 0.0;
    }
    rec(f, a, b, 0)
}

/// Truncated Gaussian CDF by quadrature, returned as `(F, 1 - F)`.
///
/// The density is divided by its largest value on the region, so far-tail
/// regions do not underflow; infinite ends are cut 40 sd beyond the point
/// of each interval closest to the mean.
pub fn quad_cdf(x: f64, mu: f64, sigma: f64, region: &[(f64, f64)]) -> (f64, f64) {
    let closest = region
        .iter()
        .map(|&(lo, hi)| mu.clamp(lo, hi))
        .min_by(|a, b| (a - mu).abs().total_cmp(&(b - mu).abs()))
        .unwrap();
    let s2 = 2.0 * sigma * sigma;
    let g = |t: f64| (-(t - closest) * (t + closest - 2.0 * mu) / s2).exp();
    let mut below = 0.0;
    let mut above = 0.0;
    for &(lo, hi) in region {
        let c = mu.clamp(lo, hi);
        let lo = lo.max(c - 40.0 * sigma);
        let hi = hi.min(c + 40.0 * sigma);
        if x >= hi {
            below += integrate(&g, lo, hi);
        } else if x <= lo {
            above += integrate(&g, lo, hi);
        } else {
            below += integrate(&g, lo, x);
            above += integrate(&g, x, hi);
        }
    }
    let total = below + above;
    (below / total, above / total)
}

/// Draws from `N(mu, sigma^2)` restricted to `region` by rejection.
pub fn rejection_sample<R: Rng>(rng: &mut R, mu: f64, sigma: f64, region: &TruncationRegion) -> f64 {
    for _ in 0..10_000_000 {
        let z: f64 = StandardNormal.sample(rng);
        let v = mu + sigma * z;
        if region.contains(v) {
            return v;
        }
    }
    panic!("region has too little mass for rejection sampling");
}

/// `n x p` design with orthonormal columns.
pub fn orthonormal_design<R: Rng>(rng: &mut R, n: usize, p: usize) -> DesignMatrix {
    let g = DMatrix::from_fn(n, p, |_, _| StandardNormal.sample(rng));
    let q = g.qr().q();
    DesignMatrix::from_matrix(q.columns(0, p).into_owned()).unwrap()
}

pub fn soft_threshold(z: f64, t: f64) -> f64 {
    z.signum() * (z.abs() - t).max(0.0)
}

pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

/// Numeric CSV with a header row.
pub fn read_numeric_csv(path: &std::path::Path) -> Option<(Vec<String>, Vec<Vec<f64>>)> {
    let text = std::fs::read_to_string(path).ok()?;
    let mut lines = text.lines();
    let header = lines.next()?.split(',').map(|s| s.trim().to_string()).collect();
    let rows = lines
        .filter(|l| !l.trim().is_empty())
        .map(|l| l.split(',').map(|v| v.trim().parse().unwrap()).collect())
        .collect();
    Some((header, rows))
}

/// Diabetes predictors and response, or `None` when the data is absent.
pub fn diabetes() -> Option<(DesignMatrix, DVector<f64>)> {
    let (header, rows) = read_numeric_csv(&data_dir().join("diabetes.csv"))?;
    let p = header.len() - 1;
    let x: Vec<Vec<f64>> = rows.iter().map(|r| r[..p].to_vec()).collect();
    let y = DVector::from_iterator(rows.len(), rows.iter().map(|r| r[p]));
    let x = DesignMatrix::from_rows(&x, header[..p].to_vec()).unwrap();
    Some((x, y))
}

/// Feasible `t` with `A (z + c t) <= b`, found by bisecting each row's
/// crossing time on `[-span, span]`. `None` when empty.
pub fn line_oracle(a: &DMatrix<f64>, b: &DVector<f64>, c: &DVector<f64>, z: &DVector<f64>, span: f64) -> Option<(f64, f64)> {
    let mut lo = f64::NEG_INFINITY;
    let mut hi = f64::INFINITY;
    for i in 0..a.nrows() {
        let g = |t: f64| a.row(i).dot(&(z + c * t).transpose()) - b[i];
        let (g_lo, g_hi) = (g(-span), g(span));
        match (g_lo <= 0.0, g_hi <= 0.0) {
            (true, true) => {}
            (false, false) => return None,
            (feasible_left, _) => {
                let (mut l, mut h) = (-span, span);
                for _ in 0..200 {
                    let m = 0.5 * (l + h);
                    if (g(m) <= 0.0) == feasible_left {
                        l = m;
                    } else {
                        h = m;
                    }
                }
                let t = 0.5 * (l + h);
                if feasible_left {
                    hi = hi.min(t);
                } else {
                    lo = lo.max(t);
                }
            }
        }
    }
    (lo < hi).then_some((lo, hi))
}
