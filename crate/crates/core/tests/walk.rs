use proptest::prelude::*;
use slocc_mbqc::walk::{
    crossing, default_lambda_grid, exact_success, per_k_curves, step_probs, success_curve, success_dp, success_enumerated,
    symmetric_first_passage, Method, WalkParams,
};
use slocc_mbqc::Error;

#[test]
fn first_step_matches_closed_form() {
    for &l in &[0.1f64, 0.379, 0.8] {
        let l2 = l * l;
        let want = 2.0 * l2 / (1.0 + 2.0 * l2 + l2 * l2);
        assert!((success_dp(l, 1).total() - want).abs() < 1e-15);
        assert!((step_probs(l, 1).1 - want).abs() < 1e-15);
    }
}

#[test]
fn near_unit_lambda_approaches_symmetric_walk() {
    let classical: f64 = (1..=10).map(symmetric_first_passage).sum();
    let p = success_dp(1.0 - 1e-9, 10).total();
    assert!((p - classical).abs() < 1e-6, "{p} vs {classical}");
}

#[test]
fn both_methods_must_agree() {
    let p = WalkParams::new(0.45f64, 14).unwrap();
    let d = exact_success(&p, Method::Both).unwrap();
    assert!((d.total() - success_dp(0.45, 14).total()).abs() < 1e-12);
}

#[test]
fn enumeration_refuses_large_budgets() {
    let p = WalkParams::new(0.5f64, 41).unwrap();
    assert!(matches!(exact_success(&p, Method::Enumerate), Err(Error::BudgetTooLarge(41))));
    assert!(exact_success(&p, Method::Dp).is_ok());
}

#[test]
fn lambda_out_of_range_rejected() {
    assert!(WalkParams::new(0.0f64, 3).is_err());
    assert!(WalkParams::new(1.0, 3).is_err());
}

#[test]
fn crossing_edges() {
    assert_eq!(crossing(10, 0.0f64).unwrap(), 0.0);
    assert!(matches!(crossing(1, 0.99f64), Err(Error::NoCrossing { .. })));
}

#[test]
fn crossing_nonincreasing_in_budget() {
    let xs: Vec<f64> = (1..=5).map(|h| crossing(2 * h, 0.4).unwrap()).collect();
    assert!(xs.windows(2).all(|w| w[1] <= w[0] + 1e-9), "{xs:?}");
}

#[test]
fn curve_is_monotone_in_lambda() {
    let c = success_curve(10, &default_lambda_grid::<f64>());
    assert_eq!(c.points.len(), 200);
    assert!(c.points.windows(2).all(|w| w[1].1 >= w[0].1 - 1e-15));
    assert!(c.points.iter().all(|p| (0.0..=1.0).contains(&p.1)));
}

#[test]
fn first_term_dominates_near_one() {
    let d = &per_k_curves(10, &[0.999f64])[0];
    assert!(d.per_k.iter().skip(1).all(|&p| p < d.per_k[0]));
}

#[test]
fn f32_path_tracks_f64() {
    let a = success_dp(0.6f32, 10).total() as f64;
    let b = success_dp(0.6f64, 10).total();
    assert!((a - b).abs() < 1e-5);
}

proptest! {
    #[test]
    fn enumeration_equals_dp(l in 0.01f64..0.99, n in 1usize..=12) {
        let a = success_dp(l, n);
        let b = success_enumerated(l, n).unwrap();
        for (x, y) in a.per_k.iter().zip(&b.per_k) {
            prop_assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn partial_sums_are_cumulative(l in 0.01f64..0.99, n in 1usize..=30) {
        let d = success_dp(l, n);
        let cum = d.cumulative();
        prop_assert!(d.per_k.iter().all(|&p| p >= 0.0));
        prop_assert!((cum[n - 1] - d.total()).abs() < 1e-12);
    }

    #[test]
    fn success_grows_with_budget(l in 0.01f64..0.99, n in 1usize..=30) {
        prop_assert!(success_dp(l, n + 1).total() >= success_dp(l, n).total() - 1e-15);
    }

    #[test]
    fn step_probabilities_normalised(l in 0.01f64..0.99, k in 1usize..=40) {
        let (a, b) = step_probs(l, k);
        prop_assert!((a + b - 1.0).abs() < 1e-12 && a >= 0.0 && b >= 0.0);
    }
}
