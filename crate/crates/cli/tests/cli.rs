use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::atomic::{AtomicUsize, Ordering};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_selinf"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn scratch(name: &str) -> PathBuf {
    static COUNTER: AtomicUsize = AtomicUsize::new(0);
    let dir = std::env::temp_dir().join(format!(
        "selinf-cli-{}-{}-{name}",
        std::process::id(),
        COUNTER.fetch_add(1, Ordering::Relaxed)
    ));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn repo() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn diabetes() -> Option<PathBuf> {
    let p = repo().join("data/diabetes.csv");
    if p.exists() {
        Some(p)
    } else {
        eprintln!("skipping: data/diabetes.csv not found");
        None
    }
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

/// Small synthetic data set with two real effects.
fn synthetic(dir: &Path) -> PathBuf {
    let path = dir.join("toy.csv");
    let mut text = String::from("a,b,c,d,resp\n");
    for i in 0..40 {
        let t = i as f64;
        let a = (t * 0.7).sin();
        let b = (t * 1.3).cos();
        let c = ((t * 2.1).sin() * 3.0).fract();
        let d = (t * 0.37).cos() * (t * 0.11).sin();
        let noise = ((t * 12.9898).sin() * 43758.5453).fract() - 0.5;
        let y = 3.0 * a - 2.0 * b + noise;
        text.push_str(&format!("{a},{b},{c},{d},{y}\n"));
    }
    std::fs::write(&path, text).unwrap();
    path
}

fn num(v: &Value) -> f64 {
    match v {
        Value::Number(n) => n.as_f64().unwrap(),
        Value::String(s) => s.parse().unwrap(),
        other => panic!("not a number: {other}"),
    }
}

#[test]
fn diabetes_worked_example() {
    let Some(data) = diabetes() else { return };
    let dir = scratch("diabetes");
    let out = run(&[
        "infer", "--data", s(&data), "--response", "y", "--standardize", "--lambda", "auto", "--alpha", "0.1", "--mode", "sign",
        "--out-dir", s(&dir),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let v = json(&dir.join("intervals.json"));
    let model: Vec<&str> = v["model"].as_array().unwrap().iter().map(|m| m.as_str().unwrap()).collect();
    assert_eq!(model, ["BMI", "BP", "S3", "S5"]);
    assert!((num(&v["lambda"]) - 190.0).abs() < 0.05 * 190.0);
    assert_eq!(v["manifest"]["sigma_source"], "estimated");
    let s3 = v["intervals"].as_array().unwrap().iter().find(|iv| iv["name"] == "S3").unwrap();
    let p = num(&s3["p_value"]);
    assert!(p > 0.05 && p < 0.1, "{p}");
    assert_eq!(s3["mode"], "sign");

    let dir95 = scratch("diabetes95");
    let out = run(&[
        "infer", "--data", s(&data), "--response", "y", "--standardize", "--alpha", "0.05", "--out-dir", s(&dir95),
    ]);
    assert_eq!(code(&out), 0);
    let v = json(&dir95.join("intervals.json"));
    let s3 = v["intervals"].as_array().unwrap().iter().find(|iv| iv["name"] == "S3").unwrap();
    assert!(num(&s3["lower"]) < 0.0 && num(&s3["upper"]) > 0.0);
}

#[test]
fn huge_lambda_gives_null_model() {
    let dir = scratch("null");
    let data = synthetic(&dir);
    let out = run(&["infer", "--data", s(&data), "--response", "resp", "--lambda", "1e9", "--out-dir", s(&dir)]);
    assert_eq!(code(&out), 4, "{}", stderr(&out));
    let v = json(&dir.join("intervals.json"));
    assert_eq!(v["model"].as_array().unwrap().len(), 0);
    assert_eq!(v["intervals"].as_array().unwrap().len(), 0);
    let csv = std::fs::read_to_string(dir.join("intervals.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1);
}

#[test]
fn user_sigma_is_recorded() {
    let dir = scratch("sigma");
    let data = synthetic(&dir);
    let out = run(&[
        "infer", "--data", s(&data), "--response", "resp", "--standardize", "--sigma", "2.0", "--lambda", "1", "--out-dir", s(&dir),
    ]);
    assert!(matches!(code(&out), 0 | 4), "{}", stderr(&out));
    let m = json(&dir.join("manifest.json"));
    assert_eq!(m["sigma_source"], "user");
    assert_eq!(m["sigma"], 2.0);
    assert_eq!(num(&json(&dir.join("intervals.json"))["sigma2"]), 4.0);
}

#[test]
fn csv_round_trips_json() {
    let dir = scratch("roundtrip");
    let data = synthetic(&dir);
    let out = run(&["infer", "--data", s(&data), "--response", "resp", "--standardize", "--out-dir", s(&dir)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let v = json(&dir.join("intervals.json"));
    let ivs = v["intervals"].as_array().unwrap();
    assert!(!ivs.is_empty());
    let mut rdr = csv::Reader::from_path(dir.join("intervals.csv")).unwrap();
    let header: Vec<String> = rdr.headers().unwrap().iter().map(str::to_string).collect();
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), ivs.len());
    for (row, iv) in rows.iter().zip(ivs) {
        assert_eq!(&row[0], iv["name"].as_str().unwrap());
        for field in ["estimate", "lower", "upper", "p_value", "level"] {
            let col = header.iter().position(|h| h == field).unwrap();
            let from_csv: f64 = row[col].parse().unwrap();
            let from_json = num(&iv[field]);
            assert_eq!(format!("{from_csv:.16e}"), format!("{from_json:.16e}"), "{field}");
            assert_eq!(from_csv.to_bits(), from_json.to_bits(), "{field}");
        }
    }
}

#[test]
fn rerun_from_manifest_is_byte_identical() {
    let dir = scratch("first");
    let data = synthetic(&dir);
    let out = run(&[
        "infer", "--data", s(&data), "--response", "resp", "--standardize", "--lambda", "auto", "--lambda-draws", "300", "--seed", "9",
        "--mode", "model", "--out-dir", s(&dir),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let again = scratch("again");
    let out = run(&["rerun", "--manifest", s(&dir.join("manifest.json")), "--out-dir", s(&again)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    for f in ["intervals.json", "intervals.csv", "manifest.json"] {
        assert_eq!(std::fs::read(dir.join(f)).unwrap(), std::fs::read(again.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn malformed_csv_names_line_and_column() {
    let dir = scratch("bad");
    let path = dir.join("bad.csv");
    std::fs::write(&path, "a,b,y\n1,2,3\n4,oops,5\n").unwrap();
    let out = run(&["infer", "--data", s(&path), "--response", "y", "--out-dir", s(&dir)]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("line 3, column 2"), "{}", stderr(&out));

    std::fs::write(&path, "a,b,y\n1,2,3\n4,5\n").unwrap();
    let out = run(&["infer", "--data", s(&path), "--response", "y", "--out-dir", s(&dir)]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("line 3"), "{}", stderr(&out));

    std::fs::write(&path, "a,b,y\n1,2,3\n4,5,6\n").unwrap();
    let out = run(&["infer", "--data", s(&path), "--response", "nope", "--out-dir", s(&dir)]);
    assert_eq!(code(&out), 2);
    let out = run(&["infer", "--data", s(&dir.join("missing.csv")), "--response", "y", "--out-dir", s(&dir)]);
    assert_eq!(code(&out), 2);
}

#[test]
fn sigma_is_required_when_p_reaches_n() {
    let dir = scratch("wide");
    let path = dir.join("wide.csv");
    std::fs::write(&path, "a,b,c,y\n1,2,0,3\n4,1,2,5\n0,3,1,1\n").unwrap();
    let out = run(&["infer", "--data", s(&path), "--response", "y", "--lambda", "0.5", "--out-dir", s(&dir)]);
    assert_eq!(code(&out), 2, "{}", stderr(&out));
}

fn tnci(args: &[&str]) -> Vec<(f64, f64, f64)> {
    let out = run(&[&["tnci"], args].concat());
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    String::from_utf8(out.stdout)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| {
            let v: Vec<f64> = l.split(',').map(|c| c.parse().unwrap()).collect();
            (v[0], v[1], v[2])
        })
        .collect()
}

#[test]
fn tnci_table() {
    let rows = tnci(&["-a", "-3", "-b", "3", "--x", "0,2.9"]);
    let w0 = rows[0].2 - rows[0].1;
    assert!((w0 - 3.2897).abs() < 0.1 * 3.2897, "{w0}");
    assert!(rows[1].2 - rows[1].1 > w0);

    let grid = tnci(&["-a", "-3", "-b", "3", "--points", "41"]);
    assert_eq!(grid.len(), 41);
    for i in 0..41 {
        let (x, lo, _) = grid[i];
        let (xm, _, hi_m) = grid[40 - i];
        assert_eq!(x, -xm);
        assert!((lo + hi_m).abs() < 1e-8, "{x}: {lo} vs {hi_m}");
    }
}

#[test]
fn tnci_rejects_empty_truncation() {
    assert_eq!(code(&run(&["tnci", "-a", "3", "-b", "3"])), 2);
    assert_eq!(code(&run(&["tnci", "-a", "3", "-b", "-3"])), 2);
}

const SMALL: [&str; 12] = ["simulate", "--n", "10", "--p", "5", "--k", "2", "--strength", "2", "--lambda", "3", "--seed"];

#[test]
fn simulate_rejects_zero_replications() {
    let dir = scratch("zero");
    let out = run(&[&SMALL[..], &["1", "--replications", "0", "--out-dir", s(&dir)]].concat());
    assert_eq!(code(&out), 2, "{}", stderr(&out));
}

#[test]
fn simulate_is_deterministic() {
    let a = scratch("sim-a");
    let b = scratch("sim-b");
    let args = |dir: &Path| {
        let mut v: Vec<String> = SMALL.iter().map(|s| s.to_string()).collect();
        v.extend(["4", "--replications", "150", "--out-dir", s(dir)].map(String::from));
        v
    };
    let out = bin().args(args(&a)).env("SELINF_THREADS", "1").output().unwrap();
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let out = bin().args(args(&b)).env("SELINF_THREADS", "3").output().unwrap();
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    for f in ["report.json", "replications.csv", "summary.csv", "manifest.json"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
    let report = json(&a.join("report.json"));
    assert_eq!(report["valid"], true);
    assert_eq!(report["scenarios"][0]["report"]["replications"], 150);

    let c = scratch("sim-c");
    let out = run(&["rerun", "--manifest", s(&a.join("manifest.json")), "--out-dir", s(&c)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(std::fs::read(a.join("report.json")).unwrap(), std::fs::read(c.join("report.json")).unwrap());
}

#[test]
fn budget_breach_exits_three_with_invalid_report() {
    let dir = scratch("budget");
    let out = run(&[
        "simulate", "--n", "10", "--p", "5", "--k", "3", "--strength", "3", "--lambda", "3", "--mode", "model", "--sign-cap", "1",
        "--replications", "100", "--out-dir", s(&dir),
    ]);
    assert_eq!(code(&out), 3, "{}", stderr(&out));
    let report = json(&dir.join("report.json"));
    assert_eq!(report["valid"], false);
    assert_eq!(report["scenarios"][0]["report"]["valid"], false);
}

#[test]
fn bundled_comparison_config_runs() {
    let dir = scratch("fig");
    let config = repo().join("configs/fig_ci_comparison.json");
    let out = run(&["simulate", "--config", s(&config), "--replications", "30", "--out-dir", s(&dir)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let report = json(&dir.join("report.json"));
    let labels: Vec<&str> = report["scenarios"]
        .as_array()
        .unwrap()
        .iter()
        .map(|s| s["label"].as_str().unwrap())
        .collect();
    assert_eq!(labels, ["strong", "weak"]);
    let summary = std::fs::read_to_string(dir.join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 3);
    assert!(dir.join("split.csv").exists());
}

#[test]
fn bad_thread_count_is_rejected() {
    let out = bin()
        .args(["tnci", "-a", "-1", "-b", "1", "--x", "0"])
        .env("SELINF_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(code(&out), 2);
}

#[test]
fn unknown_config_fields_are_rejected() {
    let dir = scratch("cfg");
    let path = dir.join("cfg.json");
    std::fs::write(&path, r#"{"experiment": "coverage", "scenarios": [], "extra": 1}"#).unwrap();
    let out = run(&["simulate", "--config", s(&path), "--out-dir", s(&dir)]);
    assert_eq!(code(&out), 2);
}
