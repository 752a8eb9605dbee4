mod common;

use approx::assert_abs_diff_eq;
use common::{lp_norm, v};
use nalgebra::DMatrix;
use proptest::prelude::*;
use siplab::harness::{
    finite_dim_sl_probe, hanner_check, hanner_suite, isometry_invariance_check, lp_sl_coordinate_case,
    lp_sl_coordinate_instance, register_quotient_subspace, signed_permutation, thm2_forward_harness, Check, Report,
    Thm2Options,
};
use siplab::harness::suites::plane_rotation;
use siplab::harness::thm2::{LinearMap, NormScramble};
use siplab::{Error, NormModel, QuotientSpace, SubspaceBasis};

#[test]
fn signed_permutations_are_lp_isometries() {
    for p in [1.5, 3.0, 4.0] {
        let m = NormModel::lp(p, 5).unwrap();
        let t = signed_permutation(5, 3);
        let r = isometry_invariance_check(&t, &m, &m, 300, 1, 1e-9).unwrap();
        assert!(r.passed && r.gate_passed, "{r:?}");
        assert!(r.sip_residual.unwrap() <= 1e-9);
    }
}

#[test]
fn rotations_only_preserve_the_euclidean_norm() {
    let t = plane_rotation(3, 0, 2, 0.4);
    let l2 = NormModel::lp(2.0, 3).unwrap();
    assert!(isometry_invariance_check(&t, &l2, &l2, 100, 1, 1e-9).unwrap().passed);
    let l3 = NormModel::lp(3.0, 3).unwrap();
    let r = isometry_invariance_check(&t, &l3, &l3, 100, 1, 1e-9).unwrap();
    assert!(!r.gate_passed && !r.passed && r.sip_residual.is_none());
    assert!(r.gate_violation.is_some());
    let singular = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
    let m2 = NormModel::lp(3.0, 2).unwrap();
    assert!(isometry_invariance_check(&singular, &m2, &m2, 10, 1, 1e-9).is_err());
}

#[test]
fn hanner_directions() {
    for (p, dim) in [(1.5, 3), (2.0, 4), (3.0, 2), (4.0, 5)] {
        let s = hanner_suite(p, dim, 2000, 8).unwrap();
        assert_eq!(s.violations, 0, "{s:?}");
    }
    // u = (1, 0), v = (1, 1) in ℓ₃: (2³ + 1) + 1 = 10 ≥ 2(1 + 2) = 6
    let r = hanner_check(&v(&[1.0, 0.0]), &v(&[1.0, 1.0]), 3.0).unwrap();
    assert_abs_diff_eq!(r.lhs, 10.0, epsilon = 1e-12);
    assert_abs_diff_eq!(r.rhs, 6.0, epsilon = 1e-12);
    assert!(r.satisfied && !r.equal);
    let r = hanner_check(&v(&[1.0, 0.0]), &v(&[1.0, 1.0]), 1.5).unwrap();
    assert!(r.satisfied && r.lhs < r.rhs);
    assert!(hanner_check(&v(&[1.0]), &v(&[1.0]), 1.0).is_err());
}

#[test]
fn hanner_equality_cases() {
    let r = hanner_check(&v(&[0.3, -1.2, 0.5]), &v(&[2.0, 0.1, -0.7]), 2.0).unwrap();
    assert!(r.equal);
    for p in [1.5, 3.0, 4.0] {
        let r = hanner_check(&v(&[0.3, 0.0, -1.1, 0.0]), &v(&[0.0, 2.5, 0.0, -0.4]), p).unwrap();
        assert!(r.equal && r.satisfied, "{r:?}");
        let direct = 2.0 * (lp_norm(&[0.3, 1.1], p).powf(p) + lp_norm(&[2.5, 0.4], p).powf(p));
        assert_abs_diff_eq!(r.rhs, direct, epsilon = 1e-12 * direct);
    }
}

#[test]
fn coordinate_case_example() {
    let s = lp_sl_coordinate_instance(4, 3.0, &[0], &[(1, 1.0)], &[(2, 1.0)], 1e-9).unwrap();
    assert!(s.passed, "{s:?}");
    assert_eq!((s.m1, s.m2), (0.0, 0.0));
    // x ± y = (0, 1, ±1, 0) already lie on Y^⊥, so both distances are ‖x ± y‖₃ = 2^{1/3}
    // and dist(x+y)³ + dist(x−y)³ = 4 = 2(|a|³ + |b|³)
    assert!(s.chain_coefficients <= 1e-12 && s.chain_norms <= 1e-12);
    assert!(lp_sl_coordinate_instance(4, 3.0, &[0], &[(0, 1.0)], &[], 1e-9).is_err());
    assert!(lp_sl_coordinate_instance(4, 3.0, &[0], &[(1, 1.0)], &[(1, 2.0)], 1e-9).is_err());
}

#[test]
fn coordinate_case_samples() {
    for (n, p, coords) in [(3, 1.5, vec![0]), (6, 3.0, vec![1, 4]), (8, 1.5, vec![0, 2, 7])] {
        let r = lp_sl_coordinate_case(n, p, &coords, 13, 1e-9).unwrap();
        assert!(r.passed, "{:?}", r.first_failure.map(|i| &r.samples[i]));
    }
    assert!(lp_sl_coordinate_case(3, 3.0, &[0, 1, 2], 0, 1e-9).is_err());
}

#[test]
fn finite_dimensions_run_out() {
    let r = finite_dim_sl_probe(&NormModel::lp(3.0, 4).unwrap(), 6, 2).unwrap();
    assert!(r.passed);
    assert!(r.attempts.iter().all(|a| a.quotient_dim < r.dim));
    let m = NormModel::lp(3.0, 3).unwrap();
    let q = QuotientSpace::new(SubspaceBasis::coordinate(&[0], m).unwrap()).unwrap();
    let err = register_quotient_subspace(&q, &[v(&[0.0, 1.0, 0.0]), v(&[1.0, 1.0, 0.0])]).unwrap_err();
    assert!(matches!(err, Error::RankDeficient { .. }), "{err:?}");
}

#[test]
fn forward_harness_on_linear_and_scrambled_maps() {
    let m = NormModel::lp(4.0, 4).unwrap();
    let f = LinearMap {
        matrix: signed_permutation(4, 9),
        src: m.clone(),
        dst: m,
    };
    let r = thm2_forward_harness(&f, &Thm2Options::new(40, 2, 1e-8)).unwrap();
    assert!(r.passed && r.y_dim == 0 && r.nonlinearity <= 1e-12, "{r:?}");
    let r = thm2_forward_harness(&NormScramble::new(3).unwrap(), &Thm2Options::new(40, 2, 1e-6)).unwrap();
    assert!(!r.passed && r.membership_residual >= 1e-2, "{r:?}");
}

#[test]
fn report_serialization() {
    let checks = vec![Check::at_most("a", 0.1, 1e-6), Check::at_least("b", 2.0, 1.0)];
    let r = Report::new("verify", serde_json::json!({"seed": 1}), serde_json::json!({}), checks);
    assert!(!r.passed);
    let csv = r.to_csv();
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().contains("check"));
    assert!(lines.next().unwrap().contains("1e-6"));
    let back: Report = serde_json::from_str(&r.to_json()).unwrap();
    assert_eq!(back, r);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn hanner_holds_for_any_pair(
        u in proptest::collection::vec(-5.0..5.0f64, 4),
        w in proptest::collection::vec(-5.0..5.0f64, 4),
        p in 1.1..6.0f64,
    ) {
        prop_assert!(hanner_check(&v(&u), &v(&w), p).unwrap().satisfied);
    }
}
