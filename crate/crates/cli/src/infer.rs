use std::path::Path;
use std::time::Instant;

use nalgebra::DVector;
use selinf::design::center;
use selinf::lasso::PenaltySpec;
use selinf::pipeline::{self, LambdaRule};
use selinf::{ConditioningMode, DesignMatrix, InferOptions, SelectiveInterval};
use serde::Serialize;

use crate::error::CliError;
use crate::manifest::{InferManifest, Manifest};
use crate::output::{fmt_num, Num, OutDir};
use crate::table::Table;
use crate::Status;

pub const CSV_HEADER: [&str; 8] = ["name", "estimate", "lower", "upper", "p_value", "mode", "level", "region"];

#[derive(Debug, Serialize)]
struct IntervalOut {
    name: String,
    estimate: Num,
    lower: Num,
    upper: Num,
    p_value: Num,
    mode: ConditioningMode,
    level: Num,
    region: Vec<[Num; 2]>,
}

impl IntervalOut {
    fn new(iv: &SelectiveInterval, mode: ConditioningMode) -> Self {
        Self {
            name: iv.target.name.clone(),
            estimate: Num(iv.estimate),
            lower: Num(iv.lower),
            upper: Num(iv.upper),
            p_value: Num(iv.pivot_at_zero),
            mode,
            level: Num(iv.level),
            region: iv
                .region
                .intervals()
                .iter()
                .map(|r| [Num(r.lower), Num(r.upper)])
                .collect(),
        }
    }

    fn csv_row(&self) -> Vec<String> {
        let region: Vec<String> = self
            .region
            .iter()
            .map(|[a, b]| format!("[{}, {}]", fmt_num(a.0), fmt_num(b.0)))
            .collect();
        vec![
            self.name.clone(),
            fmt_num(self.estimate.0),
            fmt_num(self.lower.0),
            fmt_num(self.upper.0),
            fmt_num(self.p_value.0),
            match self.mode {
                ConditioningMode::Sign => "sign".into(),
                ConditioningMode::Model => "model".into(),
            },
            fmt_num(self.level.0),
            region.join(" U "),
        ]
    }
}

#[derive(Debug, Serialize)]
struct FailureOut {
    name: String,
    error: String,
}

#[derive(Debug, Serialize)]
struct Results<'a> {
    manifest: &'a Manifest,
    model: Vec<String>,
    signs: Vec<i8>,
    lambda: Num,
    sigma2: Num,
    intervals: Vec<IntervalOut>,
    /// Selected coefficients whose interval could not be computed.
    failures: Vec<FailureOut>,
}

#[derive(Debug, Serialize)]
struct Timing {
    read_seconds: f64,
    lambda_seconds: f64,
    inference_seconds: f64,
    total_seconds: f64,
}

fn load(m: &InferManifest) -> Result<(DesignMatrix, DVector<f64>), CliError> {
    let table = Table::read(&m.data)?;
    let parse_err = |message| CliError::Parse {
        path: m.data.clone(),
        message,
    };
    let resp = table.column(&m.response).map_err(parse_err)?;
    if table.headers.len() < 2 {
        return Err(parse_err("need at least one predictor besides the response".into()));
    }
    let names: Vec<String> = (0..table.headers.len())
        .filter(|&j| j != resp)
        .map(|j| table.headers[j].clone())
        .collect();
    let rows: Vec<Vec<f64>> = table
        .rows
        .iter()
        .map(|r| (0..r.len()).filter(|&j| j != resp).map(|j| r[j]).collect())
        .collect();
    let y = DVector::from_iterator(table.rows.len(), table.rows.iter().map(|r| r[resp]));
    let x = DesignMatrix::from_rows(&rows, names)?;
    if m.standardize {
        Ok((x.standardize()?, center(&y)))
    } else {
        Ok((x, y))
    }
}

pub fn run(m: &InferManifest, out_dir: &Path) -> Result<Status, CliError> {
    let start = Instant::now();
    if let Some(s) = m.sigma {
        if !(s.is_finite() && s > 0.0) {
            return Err(CliError::Usage(format!("--sigma must be positive, got {s}")));
        }
    }
    let (x, y) = load(m)?;
    let read_seconds = start.elapsed().as_secs_f64();

    let sigma2 = match m.sigma {
        Some(s) => s * s,
        None => pipeline::estimate_sigma(&x, &y)?,
    };
    let t = Instant::now();
    let lambda = m.lambda.resolve(&x, sigma2, m.seed)?;
    let lambda_seconds = t.elapsed().as_secs_f64();
    if let LambdaRule::Expectation { .. } = m.lambda {
        log::info!("lambda = {lambda}");
    }

    let t = Instant::now();
    let opts = InferOptions {
        alpha: m.alpha,
        mode: m.mode,
        sign_cap: m.sign_cap,
        ..Default::default()
    };
    let out = pipeline::infer(&x, &y, PenaltySpec::elastic_net(lambda, m.gamma), sigma2, &opts)?;
    let inference_seconds = t.elapsed().as_secs_f64();

    let manifest = Manifest::Infer(m.clone());
    let intervals: Vec<IntervalOut> = out.intervals().map(|iv| IntervalOut::new(iv, m.mode)).collect();
    let failures: Vec<FailureOut> = out
        .failures()
        .map(|f| FailureOut {
            name: f.name.clone(),
            error: f.error.to_string(),
        })
        .collect();
    for f in &failures {
        eprintln!("warning: no interval for {}: {}", f.name, f.error);
    }
    let csv_rows: Vec<Vec<String>> = intervals.iter().map(IntervalOut::csv_row).collect();
    let results = Results {
        manifest: &manifest,
        model: out.model.iter().map(|&j| x.column_names()[j].clone()).collect(),
        signs: out.signs.clone(),
        lambda: Num(lambda),
        sigma2: Num(sigma2),
        intervals,
        failures,
    };

    let dir = OutDir::create(out_dir)?;
    if m.format.json() {
        dir.write_json("intervals.json", &results)?;
    }
    if m.format.csv() {
        dir.write_csv("intervals.csv", &CSV_HEADER, &csv_rows)?;
    }
    dir.write_json("manifest.json", &manifest)?;
    dir.write_json(
        "timing.json",
        &Timing {
            read_seconds,
            lambda_seconds,
            inference_seconds,
            total_seconds: start.elapsed().as_secs_f64(),
        },
    )?;

    if out.null_model {
        eprintln!("the lasso selected no variables at lambda = {lambda}");
        return Ok(Status::NullModel);
    }
    println!("lambda {}  sigma {}", fmt_num(lambda), fmt_num(sigma2.sqrt()));
    for row in &csv_rows {
        println!("{:>12}  estimate {:>12}  [{}, {}]  p = {}", row[0], row[1], row[2], row[3], row[4]);
    }
    if results.failures.is_empty() {
        Ok(Status::Ok)
    } else {
        Ok(Status::Numerical)
    }
}
