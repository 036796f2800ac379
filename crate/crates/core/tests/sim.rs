use selinf::pipeline::LambdaRule;
use selinf::sim::{run_coverage, run_pivot_uniformity, run_width_comparison, simulate, ExperimentConfig};
use selinf::{ConditioningMode, Error};

fn small(reps: usize) -> ExperimentConfig {
    let mut c = ExperimentConfig::sparse(10, 5, 2, 1.0, 1.0, LambdaRule::Fixed { lambda: 3.0 }, 31);
    c.replications = reps;
    c
}

#[test]
fn global_null_fcr_is_controlled() {
    let mut cfg = small(2000);
    cfg.true_beta = vec![0.0; 5];
    let r = run_coverage(&cfg).unwrap().report;
    assert!(r.fcr <= 0.1 + 3.0 * r.fcr_se, "{} +/- {}", r.fcr, r.fcr_se);
    assert!(r.selection_probability < 1.0 && r.fcr < r.pfcr);
    for s in &r.by_model_size {
        assert!((0.0..=1.0).contains(&s.fcr));
        assert!(s.model_size == 0 || (0.0..=1.0).contains(&s.coverage));
    }
    let total: usize = r.by_model_size.iter().map(|s| s.replications).sum();
    assert_eq!(total, r.replications);
}

#[test]
fn shifted_pivots_are_rejected() {
    let ks = run_pivot_uniformity(&small(2000), 5.0).unwrap();
    assert!(ks.single.unwrap().p_value < 0.01);
    let ks = run_pivot_uniformity(&small(2000), 0.0).unwrap();
    assert!(ks.single.unwrap().p_value > 0.01);
    for (_, v) in ks.by_variable {
        assert!(v.n >= 20);
    }
}

#[test]
fn model_mode_pivots_are_uniform() {
    let mut cfg = small(2000);
    cfg.mode = ConditioningMode::Model;
    cfg.sign_cap = 5;
    let ks = run_pivot_uniformity(&cfg, 0.0).unwrap();
    assert!(ks.single.unwrap().p_value > 0.01);
}

#[test]
fn width_comparison_relationships() {
    let mut cfg = ExperimentConfig::sparse(25, 50, 5, 1.0, 1.0, LambdaRule::Expectation { draws: 500 }, 41);
    cfg.replications = 500;
    let run = run_width_comparison(&cfg).unwrap();
    let s = &run.summary;
    assert!(s.valid);
    assert!(s.interior_targets > 100);
    assert!(s.interior_median_ratio <= 1.5, "{}", s.interior_median_ratio);
    assert!(s.naive_coverage < 0.9, "{}", s.naive_coverage);
    for r in &run.records {
        if let Some(m) = r.model_width {
            assert!(m > 0.0);
        }
        assert!(r.sign_width > 0.0 && r.naive_width > 0.0);
    }
}

#[test]
fn naive_intervals_undercover_under_the_null() {
    let mut cfg = ExperimentConfig::sparse(25, 50, 0, 0.0, 1.0, LambdaRule::Fixed { lambda: 6.0 }, 43);
    cfg.replications = 300;
    let s = run_width_comparison(&cfg).unwrap().summary;
    assert!(s.naive_targets > 100, "{}", s.naive_targets);
    assert!(s.naive_coverage < 0.9 - 3.0 * s.naive_coverage_se, "{} {}", s.naive_coverage, s.naive_coverage_se);
}

#[test]
fn naive_intervals_undercover_under_weak_signal() {
    let mut cfg = ExperimentConfig::sparse(25, 50, 5, 0.5, 1.0, LambdaRule::Fixed { lambda: 12.0 }, 47);
    cfg.replications = 500;
    let s = run_width_comparison(&cfg).unwrap().summary;
    assert!(s.naive_targets > 500, "{}", s.naive_targets);
    assert!(s.naive_coverage < 0.9 - 0.03, "{}", s.naive_coverage);
}

#[test]
fn capacity_failures_exhaust_the_budget() {
    let mut cfg = small(200);
    cfg.true_beta = vec![3.0, -3.0, 3.0, 0.0, 0.0];
    cfg.mode = ConditioningMode::Model;
    cfg.sign_cap = 1;
    let err = run_coverage(&cfg).unwrap_err();
    assert!(matches!(err, Error::FailureBudget { budget: 2, .. }), "{err}");
    let partial = simulate(&cfg, 0.0).unwrap();
    assert!(!partial.report.valid);
    assert!(!partial.report.failure_messages.is_empty());
}

#[test]
fn bad_configs_are_rejected() {
    let mut cfg = small(10);
    cfg.true_beta.pop();
    assert!(matches!(run_coverage(&cfg), Err(Error::Validation(_))));
    let mut cfg = small(10);
    cfg.sigma = f64::NAN;
    assert!(matches!(run_coverage(&cfg), Err(Error::Validation(_))));
    let mut cfg = small(10);
    cfg.lambda_rule = LambdaRule::Expectation { draws: 10 };
    assert!(matches!(run_coverage(&cfg), Err(Error::Validation(_))));
}

#[cfg(feature = "parallel")]
#[test]
fn reports_are_identical_across_thread_counts() {
    let cfg = small(300);
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| run_coverage(&cfg).unwrap())
    };
    assert_eq!(run(1), run(3));
}
