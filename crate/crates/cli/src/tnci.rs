use std::io::Write;

use selinf::truncnorm::{tn_interval_bounds, TruncationRegion};

use crate::args::TnciArgs;
use crate::error::CliError;
use crate::output::{fmt_num, OutDir};
use crate::Status;

/// `n` points evenly spaced inside `(a, b)`, symmetric about its midpoint.
pub fn grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    (0..n)
        .map(|i| mid + half * ((2 * i + 1) as f64 - n as f64) / n as f64)
        .collect()
}

pub fn run(a: &TnciArgs) -> Result<Status, CliError> {
    if !(a.lower < a.upper) {
        return Err(CliError::Usage(format!(
            "need a < b, got a = {} and b = {}",
            a.lower, a.upper
        )));
    }
    if !(a.alpha > 0.0 && a.alpha < 1.0) {
        return Err(CliError::Usage(format!("alpha must lie in (0, 1), got {}", a.alpha)));
    }
    let region = TruncationRegion::single(a.lower, a.upper)?;
    let xs = if a.x.is_empty() {
        if a.points == 0 {
            return Err(CliError::Usage("--points must be positive".into()));
        }
        if !(a.lower.is_finite() && a.upper.is_finite()) {
            return Err(CliError::Usage("an unbounded region needs explicit --x values".into()));
        }
        grid(a.lower, a.upper, a.points)
    } else {
        a.x.clone()
    };
    let mut rows = Vec::with_capacity(xs.len());
    for &x in &xs {
        if !region.contains(x) {
            return Err(CliError::Usage(format!("x = {x} lies outside [{}, {}]", a.lower, a.upper)));
        }
        let (lo, hi) = tn_interval_bounds(x, 1.0, &region, a.alpha)?;
        rows.push(vec![fmt_num(x), fmt_num(lo), fmt_num(hi)]);
    }
    let header = ["x", "lower", "upper"];
    match &a.out {
        Some(path) => {
            let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(std::path::Path::new("."));
            let name = path
                .file_name()
                .and_then(|n| n.to_str())
                .ok_or_else(|| CliError::Usage(format!("bad output path {}", path.display())))?;
            OutDir::create(dir)?.write_csv(name, &header, &rows)?;
        }
        None => {
            let mut out = std::io::stdout().lock();
            let mut text = header.join(",");
            text.push('\n');
            for r in &rows {
                text.push_str(&r.join(","));
                text.push('\n');
            }
            out.write_all(text.as_bytes()).map_err(|source| CliError::Write {
                path: "<stdout>".into(),
                source,
            })?;
        }
    }
    Ok(Status::Ok)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_is_symmetric_and_interior() {
        let g = grid(-3.0, 3.0, 61);
        assert_eq!(g.len(), 61);
        assert_eq!(g[30], 0.0);
        for i in 0..61 {
            assert!(g[i] > -3.0 && g[i] < 3.0);
            assert!((g[i] + g[60 - i]).abs() < 1e-15);
        }
    }
}
