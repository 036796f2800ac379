use std::path::Path;
use std::time::Instant;

use selinf::sim::{self, CoverageReport, TargetRecord, WidthRecord, WidthSummary};
use serde::Serialize;

use crate::error::CliError;
use crate::manifest::{Experiment, Manifest, SimulateManifest};
use crate::output::{fmt_num, OutDir};
use crate::Status;

#[derive(Debug, Serialize)]
#[serde(untagged)]
enum Summary {
    Coverage(Box<CoverageReport>),
    Widths(Box<WidthSummary>),
}

#[derive(Debug, Serialize)]
struct ScenarioOut {
    label: String,
    report: Summary,
}

#[derive(Debug, Serialize)]
struct Report<'a> {
    manifest: &'a Manifest,
    /// False when any scenario exceeded its failure budget.
    valid: bool,
    scenarios: Vec<ScenarioOut>,
}

#[derive(Debug, Serialize)]
struct Timing {
    scenario_seconds: Vec<(String, f64)>,
    total_seconds: f64,
}

const COVERAGE_COLUMNS: [&str; 13] = [
    "scenario",
    "replication",
    "model_size",
    "variable",
    "truth",
    "estimate",
    "lower",
    "upper",
    "width",
    "covered",
    "pivot",
    "boundary_distance_sd",
    "sd_eta",
];

fn coverage_row(label: &str, r: &TargetRecord) -> Vec<String> {
    vec![
        label.to_string(),
        r.replication.to_string(),
        r.model_size.to_string(),
        r.variable.to_string(),
        fmt_num(r.truth),
        fmt_num(r.estimate),
        fmt_num(r.lower),
        fmt_num(r.upper),
        fmt_num(r.width),
        r.covered.to_string(),
        fmt_num(r.pivot),
        fmt_num(r.boundary_distance_sd),
        fmt_num(r.sd_eta),
    ]
}

const WIDTH_COLUMNS: [&str; 11] = [
    "scenario",
    "replication",
    "model_size",
    "variable",
    "truth",
    "estimate",
    "sign_width",
    "model_width",
    "naive_width",
    "naive_covered",
    "boundary_distance_sd",
];

fn width_row(label: &str, r: &WidthRecord) -> Vec<String> {
    vec![
        label.to_string(),
        r.replication.to_string(),
        r.model_size.to_string(),
        r.variable.to_string(),
        fmt_num(r.truth),
        fmt_num(r.estimate),
        fmt_num(r.sign_width),
        r.model_width.map(fmt_num).unwrap_or_default(),
        fmt_num(r.naive_width),
        r.naive_covered.to_string(),
        fmt_num(r.boundary_distance_sd),
    ]
}

const SPLIT_COLUMNS: [&str; 6] = ["scenario", "replication", "model_size", "variable", "split_width", "full_ols_width"];

const COVERAGE_SUMMARY: [&str; 11] = [
    "scenario",
    "replications",
    "failures",
    "valid",
    "targets",
    "coverage",
    "coverage_se",
    "fcr",
    "pfcr",
    "mean_width",
    "median_width",
];

const WIDTH_SUMMARY: [&str; 13] = [
    "scenario",
    "replications",
    "failures",
    "valid",
    "mean_sign_width",
    "mean_model_width",
    "median_sign_width",
    "median_model_width",
    "mean_naive_width",
    "naive_coverage",
    "interior_median_ratio",
    "mean_split_width",
    "split_inflation",
];

pub fn run(m: &SimulateManifest, out_dir: &Path) -> Result<Status, CliError> {
    if m.scenarios.is_empty() {
        return Err(CliError::Usage("experiment has no scenarios".into()));
    }
    for s in &m.scenarios {
        s.config
            .validate()
            .map_err(|e| CliError::Usage(format!("scenario {}: {e}", s.label)))?;
    }
    let start = Instant::now();
    let mut scenarios = Vec::new();
    let mut rows = Vec::new();
    let mut split_rows = Vec::new();
    let mut summary_rows = Vec::new();
    let mut timing = Vec::new();
    let mut valid = true;
    for s in &m.scenarios {
        let t = Instant::now();
        let label = s.label.as_str();
        let report = match m.experiment {
            Experiment::Coverage => {
                let run = sim::simulate(&s.config, 0.0)?;
                rows.extend(run.records.iter().map(|r| coverage_row(label, r)));
                let r = run.report;
                summary_rows.push(vec![
                    label.to_string(),
                    r.replications.to_string(),
                    r.failures.to_string(),
                    r.valid.to_string(),
                    r.targets.to_string(),
                    fmt_num(r.coverage),
                    fmt_num(r.coverage_se),
                    fmt_num(r.fcr),
                    fmt_num(r.pfcr),
                    fmt_num(r.mean_width),
                    fmt_num(r.median_width),
                ]);
                valid &= r.valid;
                Summary::Coverage(Box::new(r))
            }
            Experiment::Widths => {
                let run = sim::run_width_comparison(&s.config)?;
                rows.extend(run.records.iter().map(|r| width_row(label, r)));
                split_rows.extend(run.split_records.iter().map(|r| {
                    vec![
                        label.to_string(),
                        r.replication.to_string(),
                        r.model_size.to_string(),
                        r.variable.to_string(),
                        fmt_num(r.split_width),
                        fmt_num(r.full_ols_width),
                    ]
                }));
                let r = run.summary;
                summary_rows.push(vec![
                    label.to_string(),
                    r.replications.to_string(),
                    r.failures.to_string(),
                    r.valid.to_string(),
                    fmt_num(r.mean_sign_width),
                    fmt_num(r.mean_model_width),
                    fmt_num(r.median_sign_width),
                    fmt_num(r.median_model_width),
                    fmt_num(r.mean_naive_width),
                    fmt_num(r.naive_coverage),
                    fmt_num(r.interior_median_ratio),
                    fmt_num(r.mean_split_width),
                    fmt_num(r.split_inflation),
                ]);
                valid &= r.valid;
                Summary::Widths(Box::new(r))
            }
        };
        timing.push((s.label.clone(), t.elapsed().as_secs_f64()));
        scenarios.push(ScenarioOut {
            label: s.label.clone(),
            report,
        });
    }

    let manifest = Manifest::Simulate(m.clone());
    let dir = OutDir::create(out_dir)?;
    dir.write_json(
        "report.json",
        &Report {
            manifest: &manifest,
            valid,
            scenarios,
        },
    )?;
    let (columns, summary_columns): (&[&str], &[&str]) = match m.experiment {
        Experiment::Coverage => (&COVERAGE_COLUMNS, &COVERAGE_SUMMARY),
        Experiment::Widths => (&WIDTH_COLUMNS, &WIDTH_SUMMARY),
    };
    dir.write_csv("replications.csv", columns, &rows)?;
    if m.experiment == Experiment::Widths {
        dir.write_csv("split.csv", &SPLIT_COLUMNS, &split_rows)?;
    }
    dir.write_csv("summary.csv", summary_columns, &summary_rows)?;
    dir.write_json("manifest.json", &manifest)?;
    dir.write_json(
        "timing.json",
        &Timing {
            scenario_seconds: timing,
            total_seconds: start.elapsed().as_secs_f64(),
        },
    )?;

    println!("{}", summary_columns.join("\t"));
    for row in &summary_rows {
        println!("{}", row.join("\t"));
    }
    if valid {
        Ok(Status::Ok)
    } else {
        eprintln!("failure budget exceeded; report.json is marked invalid");
        Ok(Status::Numerical)
    }
}
