use proptest::prelude::*;
use slocc_mbqc::mps::{alternating_nun_ring, bub_sites, cluster_sites, nun_ring_length, nun_sites, BoundaryMode};
use slocc_mbqc::qmath::{d_theta, rz_re, Pauli};
use slocc_mbqc::statevec::{
    build_cluster, fidelity, schmidt_spectrum, stabilizer_residual, LatticeSpec, MeasureMode, MeasurementBasis, PureState, Topology,
    DEFAULT_BUDGET,
};
use slocc_mbqc::{Error, PureStateF64};
use std::f64::consts::FRAC_PI_4;

#[test]
fn budget_is_enforced() {
    let spec = LatticeSpec::<f64>::new(Topology::Chain(12));
    assert!(matches!(build_cluster(&spec, None, 1 << 10), Err(Error::TooManyQubits { .. })));
}

#[test]
fn measuring_twice_fails() {
    let st = build_cluster(&LatticeSpec::<f64>::new(Topology::Chain(3)), None, DEFAULT_BUDGET).unwrap();
    let m = st.measure_forced(1, &MeasurementBasis::x(), 0).unwrap();
    assert!(matches!(m.state.measure_forced(1, &MeasurementBasis::x(), 0), Err(Error::AlreadyMeasured(1))));
}

#[test]
fn seeded_measurement_reproducible() {
    let st = build_cluster(&LatticeSpec::<f64>::new(Topology::Ring(6)), None, DEFAULT_BUDGET).unwrap();
    let a = st.measure(2, &MeasurementBasis::xy(0.4), MeasureMode::Sample(5)).unwrap();
    let b = st.measure(2, &MeasurementBasis::xy(0.4), MeasureMode::Sample(5)).unwrap();
    assert_eq!(a.outcome, b.outcome);
    assert_eq!(a.state.amps(), b.state.amps());
}

#[test]
fn cluster_bond_carries_one_ebit() {
    let st = build_cluster(&LatticeSpec::<f64>::new(Topology::Chain(6)), None, DEFAULT_BUDGET).unwrap();
    let s = schmidt_spectrum(&st, &[0, 1, 2]);
    assert!(s.iter().filter(|&&x| x > 1e-12).all(|&x| (x - 0.5f64.sqrt()).abs() < 1e-12));
}

#[test]
fn b_even_ring_correlators() {
    let n = 8;
    let theta = 0.35f64;
    let spec = (0..n).step_by(2).fold(LatticeSpec::new(Topology::Ring(n)), |s, k| s.with_op(k, d_theta(theta)));
    let st = build_cluster(&spec, None, DEFAULT_BUDGET).unwrap();
    let c2 = (2.0 * theta).cos();
    assert!((st.expect(&[(2, Pauli::Z), (3, Pauli::X)]).re - c2).abs() < 1e-10);
    assert!((st.expect(&[(2, Pauli::Z), (4, Pauli::Z)]).re - c2 * c2).abs() < 1e-10);
}

#[test]
fn nun_length_symmetric_about_quarter_turn() {
    let a = nun_ring_length(400, 0.3f64, 0.7).unwrap().length;
    let b = nun_ring_length(400, 2.0 * FRAC_PI_4 - 0.3, 0.7).unwrap().length;
    assert!((a - b).abs() < 1e-8);
    assert!(matches!(nun_ring_length(400, FRAC_PI_4, 0.7), Err(Error::InsufficientDecay(_))));
}

#[test]
fn bub_mps_matches_dense() {
    let th = [0.3f64, 0.6, 0.9, 1.2, 0.5];
    let g = [0.4f64, 1.6, 2.9, 0.2, 1.0];
    for n in [3usize, 5, 7, 9, 11] {
        let mps = bub_sites(n, &th, &g).unwrap().contract().unwrap();
        let spec =
            (1..n).step_by(2).fold(LatticeSpec::new(Topology::Chain(n)), |s, k| s.with_op(k, d_theta(th[k / 2]) * rz_re(2.0 * g[k / 2])));
        let dense = build_cluster(&spec, None, DEFAULT_BUDGET).unwrap();
        assert!(1.0 - fidelity(&mps, &dense) < 1e-10, "n = {n}");
    }
    assert!(bub_sites(6, &th, &g).is_err());
}

#[test]
fn bub_cuts_have_theta_schmidt_values() {
    let th = 0.4f64;
    let mps = bub_sites(7, &[th; 3], &[0.3; 3]).unwrap().contract().unwrap().normalized();
    for cut in 1..7 {
        let left: Vec<usize> = (0..cut).collect();
        let s = schmidt_spectrum(&mps, &left);
        assert!((s[0] - th.cos()).abs() < 1e-10 && (s[1] - th.sin()).abs() < 1e-10);
    }
}

fn topology() -> impl Strategy<Value = Topology> {
    prop_oneof![
        (2usize..=10).prop_map(Topology::Chain),
        (3usize..=10).prop_map(Topology::Ring),
        (2usize..=3, 2usize..=4).prop_map(|(rows, cols)| Topology::Grid { rows, cols }),
        Just(Topology::Cubic { lx: 2, ly: 2, lz: 2 }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]
    #[test]
    fn stabilizers_hold(t in topology()) {
        let st: PureStateF64 = build_cluster(&LatticeSpec::new(t), None, DEFAULT_BUDGET).unwrap();
        prop_assert!(stabilizer_residual(&st, &t) < 1e-12);
    }

    #[test]
    fn nun_mps_equals_dense(n in 3usize..=12, theta in 0.1f64..1.4, gamma in 0.0f64..6.2) {
        let assign: Vec<Option<(f64, f64)>> = (0..n).map(|k| (k % 2 == 1).then_some((theta, gamma))).collect();
        let mps = nun_sites(&assign).unwrap().contract().unwrap();
        let spec = assign.iter().enumerate().fold(LatticeSpec::new(Topology::Ring(n)), |s, (k, a)| match a {
            Some((t, g)) => s.with_op(k, slocc_mbqc::mps::nun_site_operator(*t, *g)),
            None => s,
        });
        let dense = build_cluster(&spec, None, DEFAULT_BUDGET).unwrap();
        prop_assert!(1.0 - fidelity(&mps, &dense) < 1e-10);
    }

    #[test]
    fn open_cluster_mps_equals_dense(n in 2usize..=12) {
        let mps = cluster_sites::<f64>(n, BoundaryMode::Open).unwrap().contract().unwrap();
        let dense = build_cluster(&LatticeSpec::new(Topology::Chain(n)), None, DEFAULT_BUDGET).unwrap();
        prop_assert!(1.0 - fidelity(&mps, &dense) < 1e-10);
    }

    #[test]
    fn unital_wires(theta in 0.1f64..1.4, gamma in 0.0f64..6.2) {
        let ring = alternating_nun_ring(12, theta, gamma).unwrap();
        prop_assert!((0..12).all(|k| ring.unitality_residual(k) < 1e-12));
    }

    #[test]
    fn bub_odd_sites_not_unital(t in prop::array::uniform3(0.1f64..0.7)) {
        let chain = bub_sites(7, &t, &[0.0; 3]).unwrap();
        prop_assert!((1..6).filter(|k| k % 2 == 0).all(|k| chain.unitality_residual(k) > 1e-3));
    }

    #[test]
    fn measurement_probabilities_sum_to_one(site in 0usize..6, xi in -3.0f64..3.0) {
        let st = build_cluster(&LatticeSpec::<f64>::new(Topology::Chain(6)), None, DEFAULT_BUDGET).unwrap();
        let (p0, p1) = st.outcome_probs(site, &MeasurementBasis::xy(xi)).unwrap();
        prop_assert!((p0 + p1 - 1.0).abs() < 1e-12);
    }
}

#[test]
fn product_state_has_no_entanglement() {
    let v = slocc_mbqc::qmath::ket_plus::<f64>();
    let st = PureState::product(&[v, v, v], DEFAULT_BUDGET).unwrap();
    let s = schmidt_spectrum(&st, &[0]);
    assert!((s[0] - 1.0).abs() < 1e-12);
}
