use selinf_wasm::{density_curve, interval_curve, lasso_demo, pivot, DemoSettings};

#[test]
fn curve_is_antisymmetric_and_widens_near_the_edges() {
    let c = interval_curve(-3.0, 3.0, 0.1, 60).unwrap();
    assert_eq!(c.len(), 180);
    let rows: Vec<&[f64]> = c.chunks(3).collect();
    for i in 0..60 {
        let (l, u) = (rows[i][1], rows[59 - i][2]);
        assert!((l + u).abs() < 1e-8, "{l} {u}");
    }
    let width = |r: &[f64]| r[2] - r[1];
    assert!(width(rows[0]) > width(rows[30]));
}

#[test]
fn density_integrates_to_one() {
    let d = density_curve(0.7, -1.0, 2.0, 2000).unwrap();
    let pts: Vec<(f64, f64)> = d.chunks(2).map(|c| (c[0], c[1])).collect();
    let area: f64 = pts.windows(2).map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1)).sum();
    assert!((area - 1.0).abs() < 1e-5, "{area}");
}

#[test]
fn pivot_is_a_cdf() {
    assert!(pivot(-1.0, 0.0, -1.0, 1.0).unwrap().abs() < 1e-12);
    assert!((pivot(0.0, 0.0, -1.0, 1.0).unwrap() - 0.5).abs() < 1e-12);
    assert!(pivot(2.0, 0.0, -1.0, 1.0).is_err());
    assert!(pivot(0.0, 0.0, 1.0, -1.0).is_err());
}

#[test]
fn demo_reports_selected_coefficients() {
    let demo = lasso_demo(DemoSettings {
        n: 50,
        p: 10,
        k: 3,
        strength: 2.0,
        lambda: 15.0,
        alpha: 0.1,
        model_mode: false,
        seed: 3,
        draw: 0,
    })
    .unwrap();
    assert_eq!(demo.intervals.len() + demo.failures.len(), demo.model.len());
    assert!(demo.model.len() >= 3);
    for iv in &demo.intervals {
        assert!(iv.lower <= iv.estimate && iv.estimate <= iv.upper);
        assert!(iv.naive_lower < iv.naive_upper);
    }
    let json = serde_json::to_string(&demo).unwrap();
    assert!(json.contains("\"intervals\""));
}

#[test]
fn demo_rejects_oversized_problems() {
    let mut s = DemoSettings {
        n: 50,
        p: 10,
        k: 3,
        strength: 2.0,
        lambda: 15.0,
        alpha: 0.1,
        model_mode: true,
        seed: 3,
        draw: 1,
    };
    assert!(lasso_demo(s).is_ok());
    s.p = 1000;
    assert!(lasso_demo(s).is_err());
    s.p = 10;
    s.k = 11;
    assert!(lasso_demo(s).is_err());
}
