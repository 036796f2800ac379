mod common;

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use selinf::lasso::{self, PenaltySpec, SolverOptions};
use selinf::pipeline::contrasts;
use selinf::pivot::{decompose, sign_family_limits, Covariance};
use selinf::rng::{normal_matrix, normal_vector, stream};
use selinf::selection::{build_polyhedron, enumerate_sign_polyhedra, sign_pattern, SignFamily, MEMBERSHIP_TOL};
use selinf::DesignMatrix;

fn random_design(seed: u64, n: usize, p: usize) -> DesignMatrix {
    let mut r = stream(seed, 0);
    DesignMatrix::from_matrix(normal_matrix(&mut r, n, p)).unwrap()
}

/// Design realizing the two-sided sign geometry: along the contrast of the
/// first selected coefficient only `{+,+}` and `{-,-}` are reachable.
fn partition_design() -> (DesignMatrix, DVector<f64>) {
    let x = DMatrix::from_row_slice(2, 3, &[1.5, 0.5, -0.5, 1.25, 0.25, 0.25]);
    (DesignMatrix::from_matrix(x).unwrap(), DVector::from_vec(vec![-0.5, 3.0]))
}

#[test]
fn ridge_perturbation_is_continuous() {
    let x = random_design(1, 12, 6);
    let model = [0, 2, 5];
    let signs = [1, -1, 1];
    let a = build_polyhedron(&x, &model, &signs, PenaltySpec::elastic_net(2.0, 0.0)).unwrap();
    let b = build_polyhedron(&x, &model, &signs, PenaltySpec::elastic_net(2.0, 1e-12)).unwrap();
    assert!((&a.a - &b.a).amax() <= 1e-6);
    assert!((&a.b - &b.b).amax() <= 1e-6);
}

#[test]
fn enumeration_counts() {
    let x = random_design(2, 10, 5);
    let pen = PenaltySpec::lasso(1.0);
    assert_eq!(enumerate_sign_polyhedra(&x, &[3], pen, 15).unwrap().len(), 2);
    let all = enumerate_sign_polyhedra(&x, &[0, 1, 4], pen, 15).unwrap();
    assert_eq!(all.len(), 8);
    let mut patterns: Vec<Vec<i8>> = all.iter().map(|p| p.signs.clone()).collect();
    patterns.sort();
    patterns.dedup();
    assert_eq!(patterns.len(), 8);
    assert!(enumerate_sign_polyhedra(&x, &[0, 1, 4], pen, 2).is_err());
}

#[test]
fn fast_family_matches_direct_construction() {
    let x = random_design(3, 15, 6);
    let pen = PenaltySpec::elastic_net(1.5, 0.3);
    let model = [1, 2, 4];
    let family = SignFamily::new(&x, &model, pen).unwrap();
    for code in 0..8 {
        let s = sign_pattern(code, 3);
        let direct = build_polyhedron(&x, &model, &s, pen).unwrap();
        let fast = family.polyhedron(&s);
        assert!((&direct.a - &fast.a).amax() < 1e-12);
        assert!((&direct.b - &fast.b).amax() < 1e-12);
        assert_eq!(direct.row_tags, fast.row_tags);
    }
}

#[test]
fn observed_event_membership() {
    let mut r = stream(4, 0);
    let mut checked = 0;
    for _ in 0..300 {
        let n = 20;
        let p = 8;
        let x = DesignMatrix::from_matrix(normal_matrix(&mut r, n, p)).unwrap();
        let beta = normal_vector(&mut r, p, 1.0);
        let y = x.values() * beta + normal_vector(&mut r, n, 1.0);
        let pen = PenaltySpec::lasso(5.0);
        let sol = lasso::solve(&x, &y, pen, &SolverOptions::default()).unwrap();
        if sol.model.is_empty() {
            continue;
        }
        let poly = build_polyhedron(&x, &sol.model, &sol.signs, pen).unwrap();
        assert!(poly.max_violation(&y) <= MEMBERSHIP_TOL, "violation {}", poly.max_violation(&y));
        checked += 1;
    }
    assert!(checked > 200);
}

#[test]
fn elastic_net_solution_lies_in_its_polyhedron() {
    let mut r = stream(5, 0);
    for _ in 0..200 {
        let x = DesignMatrix::from_matrix(normal_matrix(&mut r, 15, 10)).unwrap();
        let y = normal_vector(&mut r, 15, 3.0);
        let pen = PenaltySpec::elastic_net(2.0, 0.7);
        let sol = lasso::solve(&x, &y, pen, &SolverOptions::default()).unwrap();
        if sol.model.is_empty() {
            continue;
        }
        let poly = build_polyhedron(&x, &sol.model, &sol.signs, pen).unwrap();
        assert!(poly.contains(&y, MEMBERSHIP_TOL));
    }
}

#[test]
fn partition_property_small_scale() {
    let x = random_design(6, 3, 3);
    let pen = PenaltySpec::lasso(0.8);
    let mut cells = Vec::new();
    for mask in 1u32..8 {
        let model: Vec<usize> = (0..3).filter(|j| mask & (1 << j) != 0).collect();
        cells.extend(enumerate_sign_polyhedra(&x, &model, pen, 15).unwrap());
    }
    let mut r = stream(6, 1);
    for _ in 0..100_000 {
        let y = normal_vector(&mut r, 3, 2.0);
        let strict: Vec<_> = cells.iter().filter(|c| c.max_violation(&y) < 0.0).collect();
        assert!(strict.len() <= 1, "{} polyhedra contain {y:?} strictly", strict.len());
        let sol = lasso::solve(&x, &y, pen, &SolverOptions::default()).unwrap();
        if let Some(cell) = strict.first() {
            assert_eq!((&cell.model, &cell.signs), (&sol.model, &sol.signs));
        }
    }
}

#[test]
fn only_matching_sign_patterns_meet_the_line() {
    let (x, y) = partition_design();
    let pen = PenaltySpec::lasso(1.0);
    let sol = lasso::solve(&x, &y, pen, &SolverOptions::default()).unwrap();
    assert_eq!(sol.model, vec![0, 2]);
    assert_eq!(sol.signs, vec![1, 1]);
    let family = SignFamily::new(&x, &sol.model, pen).unwrap();
    let eta = contrasts(&x, &sol.model).unwrap().row(0).transpose();
    let dec = decompose(&y, &eta, &Covariance::Isotropic(1.0)).unwrap();
    let hits: Vec<Vec<i8>> = sign_family_limits(&family, &dec)
        .iter()
        .enumerate()
        .filter(|(_, l)| l.is_some())
        .map(|(code, _)| sign_pattern(code as u64, 2))
        .collect();
    assert_eq!(hits, vec![vec![1, 1], vec![-1, -1]]);
    // every pattern agrees with a brute-force walk along the line
    for code in 0..4 {
        let poly = family.polyhedron(&sign_pattern(code, 2));
        let walked = common::line_oracle(&poly.a, &poly.b, &dec.c, &dec.z, 1e4);
        assert_eq!(walked.is_some(), hits.contains(&poly.signs));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn row_count(seed in 0u64..1000, p in 1usize..9, mask in 1u32..256, gamma in 0.0f64..1.0) {
        let x = random_design(seed, 12, p);
        let model: Vec<usize> = (0..p).filter(|j| mask & (1 << j) != 0).collect();
        prop_assume!(!model.is_empty());
        let signs: Vec<i8> = model.iter().map(|j| if (seed >> j) & 1 == 0 { 1 } else { -1 }).collect();
        let poly = build_polyhedron(&x, &model, &signs, PenaltySpec::elastic_net(1.0, gamma)).unwrap();
        prop_assert_eq!(poly.n_rows(), 2 * (p - model.len()) + model.len());
        prop_assert_eq!(poly.a.ncols(), 12);
    }
}
