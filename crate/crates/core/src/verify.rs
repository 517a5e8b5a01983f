//! Registry of closed-form-versus-oracle checks run by `verify`.
//!
//! Every closed form under test is reached through [`Formulas`], so a
//! perturbed formula can be injected to confirm that the matching check
//! fails.

use crate::mps::{alternating_nun_ring, cluster_sites, nun_site_operator, nun_sites, ring_with_ops, BoundaryMode};
use crate::percolation::{generate, spans, spans_bfs};
use crate::protocol::{
    bundo_oracle_deviation, first_pair_probs, nun_entangle, nun_rotate, strategy1_basis, strategy2_basis, BubChain, EntangleFragment,
    NunChain, OutcomeSource, RotationTarget,
};
use crate::qmath::{d_theta, hadamard, pauli_x, random_unitary, rx_re, rz, rz_re, svd2, Mat2, Pauli};
use crate::scalar::{c, C};
use crate::slocc::{b_canon, classify, n_canon, strategy1_born_probs, strategy2_gate, Strategy2Gate};
use crate::statevec::{
    build_cluster, extract_teleported, reduced_density, stabilizer_residual, two_point, vec_fidelity, ForcedMeasurement, LatticeSpec,
    MeasurementBasis, TeleportRun, Topology, DEFAULT_BUDGET,
};
use crate::walk::{step_probs, success_dp, success_enumerated};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

/// Closed forms exercised by the checks.
#[derive(Clone, Copy)]
pub struct Formulas {
    pub byproduct_angle: fn(f64, f64, f64) -> f64,
    pub strategy1_born: fn(f64, f64, f64) -> (f64, f64),
    pub strategy2_gate: fn(f64, f64, u8) -> Strategy2Gate<f64>,
    pub lemma2: fn(f64, &[f64]) -> Mat2<f64>,
    pub single_n_correlator: fn(f64, f64) -> f64,
    pub alternating_correlator: fn(f64, f64, usize) -> f64,
    pub bub_pair_p0: fn(f64, f64) -> f64,
    pub walker_step: fn(f64, usize) -> (f64, f64),
}

fn single_n(theta: f64, gamma: f64) -> f64 {
    (2.0 * theta).cos() * gamma.cos()
}

fn alternating(theta: f64, gamma: f64, j: usize) -> f64 {
    ((2.0 * theta).cos() * gamma.cos()).powi(j as i32)
}

fn bub_pair(t1: f64, t3: f64) -> f64 {
    0.5 * (1.0 + (2.0 * t1).cos() * (2.0 * t3).cos())
}

impl Default for Formulas {
    fn default() -> Self {
        Self {
            byproduct_angle: crate::slocc::strategy1_byproduct_angle,
            strategy1_born: strategy1_born_probs,
            strategy2_gate,
            lemma2: crate::slocc::lemma2_density,
            single_n_correlator: single_n,
            alternating_correlator: alternating,
            bub_pair_p0: bub_pair,
            walker_step: step_probs,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckReport {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

type CheckFn = fn(&Formulas) -> (bool, String);

pub fn registry() -> Vec<(&'static str, CheckFn)> {
    vec![
        ("qmath.svd2", check_svd),
        ("qmath.identities", check_identities),
        ("slocc.classify", check_classify),
        ("strategy1.map", check_strategy1_map),
        ("strategy1.born", check_strategy1_born),
        ("strategy2.map", check_strategy2),
        ("statevec.stabilizers", check_stabilizers),
        ("statevec.cluster_compilation", check_cluster_compilation),
        ("statevec.lemma2", check_lemma2),
        ("mps.dense", check_mps_dense),
        ("mps.unitality", check_unitality),
        ("correlator.single_n", check_single_n),
        ("correlator.alternating", check_alternating),
        ("protocol.nun_rotate", check_nun_rotate),
        ("protocol.entangle", check_entangle),
        ("protocol.bub_pair", check_bub_pair),
        ("walk.oracle", check_walk_oracle),
        ("walk.dual", check_walk_dual),
        ("percolation.union_find", check_union_find),
    ]
}

/// Runs every check whose name contains `filter`.
pub fn run_checks(filter: Option<&str>, formulas: &Formulas) -> Vec<CheckReport> {
    registry()
        .into_par_iter()
        .filter(|(name, _)| filter.map_or(true, |f| name.contains(f)))
        .map(|(name, f)| {
            let (passed, detail) = f(formulas);
            CheckReport { name, passed, detail }
        })
        .collect()
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn verdict(err: f64, tol: f64) -> (bool, String) {
    (err < tol, format!("max error {err:.3e} (tol {tol:.0e})"))
}

fn teleport1(op: Mat2<f64>, basis: MeasurementBasis<f64>, outcome: u8) -> Mat2<f64> {
    let spec = LatticeSpec::new(Topology::Chain(2)).with_op(0, op);
    extract_teleported(&TeleportRun::single(spec, 0, 1, vec![ForcedMeasurement { site: 0, basis, outcome }])).expect("nonzero branch")
}

fn random_n(r: &mut ChaCha8Rng) -> (Mat2<f64>, f64, f64) {
    let theta = r.random_range(0.05..1.52);
    let gamma = r.random_range(0.0..2.0 * PI);
    (random_unitary(r) * d_theta(theta) * hadamard() * rz_re(gamma), theta, gamma)
}

fn check_svd(_: &Formulas) -> (bool, String) {
    let mut r = rng(11);
    let mut err: f64 = 0.0;
    for _ in 0..500 {
        let m = Mat2::new(
            c(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0)),
            c(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0)),
            c(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0)),
            c(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0)),
        );
        if let Ok(s) = svd2(&m) {
            err = err.max(s.reconstruct().max_abs_diff(&m));
        }
    }
    verdict(err, 1e-12)
}

fn check_identities(_: &Formulas) -> (bool, String) {
    let mut err = (pauli_x::<f64>() * hadamard()).max_abs_diff(&(hadamard() * crate::qmath::pauli_z()));
    let mut r = rng(12);
    for _ in 0..100 {
        let a: C<f64> = c(r.random_range(-3.0..3.0), r.random_range(-1.0..1.0));
        err = err.max((rz(a) * pauli_x()).max_abs_diff(&(pauli_x() * rz(-a))));
    }
    verdict(err, 1e-12)
}

fn check_classify(_: &Formulas) -> (bool, String) {
    let mut r = rng(13);
    let mut bad = 0;
    let mut err: f64 = 0.0;
    for _ in 0..500 {
        let (n, theta, gamma) = random_n(&mut r);
        let op = classify(&n).expect("invertible");
        if !op.flags.is_n_type {
            bad += 1;
        }
        let canon = n_canon(&op).expect("n-type");
        err = err.max(canon.matrix().dist_up_to_scale(&n));
        let t = theta.min(FRAC_PI_2 - theta);
        err = err.max((canon.theta - t).abs());
        if theta <= FRAC_PI_4 {
            let g = (canon.gamma - gamma).rem_euclid(2.0 * PI);
            err = err.max(g.min(2.0 * PI - g));
        }
        let b = random_unitary(&mut r) * d_theta(r.random_range(0.05..1.52));
        let bop = classify(&b).expect("invertible");
        if !bop.flags.is_b_type {
            bad += 1;
        }
        err = err.max(b_canon(&bop).expect("b-type").matrix().dist_up_to_scale(&b));
    }
    (bad == 0 && err < 1e-9, format!("{bad} misclassified, reconstruction error {err:.3e}"))
}

fn check_strategy1_map(f: &Formulas) -> (bool, String) {
    let mut r = rng(14);
    let mut err: f64 = 0.0;
    for _ in 0..300 {
        let (n, _, _) = random_n(&mut r);
        let canon = n_canon(&classify(&n).expect("invertible")).expect("n-type");
        let xi = r.random_range(-PI..PI);
        let b = strategy1_basis(&canon, xi).expect("basis");
        err = err.max(teleport1(n, b, 0).dist_up_to_scale(&(hadamard() * rz_re(xi))));
        let mu = (f.byproduct_angle)(canon.theta, canon.gamma, xi);
        err = err.max(teleport1(n, b, 1).dist_up_to_scale(&(rx_re(mu) * hadamard() * rz_re(xi))));
    }
    verdict(err, 1e-9)
}

fn check_strategy1_born(f: &Formulas) -> (bool, String) {
    let mut r = rng(15);
    let mut err: f64 = 0.0;
    for _ in 0..300 {
        let (n, _, _) = random_n(&mut r);
        let canon = n_canon(&classify(&n).expect("invertible")).expect("n-type");
        let xi = r.random_range(-PI..PI);
        let b = strategy1_basis(&canon, xi).expect("basis");
        let spec = LatticeSpec::new(Topology::Chain(2)).with_op(0, n);
        let st = build_cluster(&spec, None, DEFAULT_BUDGET).expect("small");
        let (p0, _) = st.outcome_probs(0, &b).expect("valid");
        err = err.max((p0 - (f.strategy1_born)(canon.theta, canon.gamma, xi).0).abs());
    }
    verdict(err, 1e-10)
}

fn check_strategy2(f: &Formulas) -> (bool, String) {
    let mut r = rng(16);
    let mut err: f64 = 0.0;
    for _ in 0..300 {
        let b = random_unitary(&mut r) * d_theta(r.random_range(0.05..1.52));
        let canon = b_canon(&classify(&b).expect("invertible")).expect("b-type");
        let beta = r.random_range(-PI..PI);
        let basis = strategy2_basis(&canon, beta);
        for m in 0..2u8 {
            let want = (f.strategy2_gate)(canon.theta, beta, m).matrix();
            err = err.max(teleport1(b, basis, m).dist_up_to_scale(&want));
        }
    }
    verdict(err, 1e-9)
}

fn check_stabilizers(_: &Formulas) -> (bool, String) {
    let tops = [Topology::Chain(6), Topology::Ring(7), Topology::Grid { rows: 3, cols: 3 }, Topology::Cubic { lx: 2, ly: 2, lz: 3 }];
    let err = tops
        .iter()
        .map(|t| stabilizer_residual(&build_cluster(&LatticeSpec::<f64>::new(*t), None, DEFAULT_BUDGET).expect("small"), t))
        .fold(0.0, f64::max);
    verdict(err, 1e-12)
}

/// Byproduct-corrected output of the plain 5-site cluster with adaptive
/// x–y plane measurements, over all 16 branches.
pub fn cluster_compilation_error(targets: &[RotationTarget<f64>], seed: u64) -> f64 {
    let mut r = rng(seed);
    let spec = LatticeSpec::<f64>::new(Topology::Chain(5));
    let mut worst: f64 = 0.0;
    for t in targets {
        let psi = random_unitary::<f64, _>(&mut r).col(0);
        let full = build_cluster(&spec, Some((0, psi)), DEFAULT_BUDGET).expect("small");
        let seg = t.segments();
        for branch in 0..16u8 {
            let (mut x, mut z) = (false, false);
            let mut st = full.clone();
            for (site, a) in seg.iter().enumerate() {
                let m = (branch >> (3 - site)) & 1;
                let alpha = if x { -a } else { *a };
                st = match st.measure_forced(site, &MeasurementBasis::xy(alpha), m) {
                    Ok(s) => s.state,
                    Err(_) => return f64::INFINITY,
                };
                (x, z) = (z ^ (m == 1), x);
            }
            let mut frame = Mat2::identity();
            if z {
                frame = crate::qmath::pauli_z() * frame;
            }
            if x {
                frame = pauli_x() * frame;
            }
            let want = (frame * t.matrix()).apply(psi);
            worst = worst.max(1.0 - vec_fidelity(&st.factor_qubit(4), &want));
        }
    }
    worst
}

fn check_cluster_compilation(_: &Formulas) -> (bool, String) {
    let mut r = rng(17);
    let targets: Vec<_> =
        (0..10).map(|_| RotationTarget::new(r.random_range(-PI..PI), r.random_range(-PI..PI), r.random_range(-PI..PI))).collect();
    verdict(cluster_compilation_error(&targets, 18), 1e-10)
}

fn check_lemma2(f: &Formulas) -> (bool, String) {
    let mut r = rng(19);
    let mut err: f64 = 0.0;
    for top in [Topology::Grid { rows: 3, cols: 3 }, Topology::Chain(8)] {
        for _ in 0..5 {
            let n = top.n_sites();
            let thetas: Vec<f64> = (0..n).map(|_| r.random_range(0.05..1.52)).collect();
            let spec = (0..n).fold(LatticeSpec::new(top), |s, k| s.with_op(k, d_theta(thetas[k])));
            let st = build_cluster(&spec, None, DEFAULT_BUDGET).expect("small");
            for k in 0..n {
                let rho = reduced_density(&st, &[k]).to_mat2().expect("one qubit");
                let nb: Vec<f64> = top.neighbors(k).iter().map(|&j| thetas[j]).collect();
                err = err.max(rho.max_abs_diff(&(f.lemma2)(thetas[k], &nb)));
            }
        }
    }
    verdict(err, 1e-10)
}

fn check_mps_dense(_: &Formulas) -> (bool, String) {
    let mut err: f64 = 0.0;
    let mut r = rng(20);
    for n in [4usize, 6, 8] {
        let assign: Vec<Option<(f64, f64)>> =
            (0..n).map(|k| (k % 2 == 1).then(|| (r.random_range(0.1..1.4), r.random_range(0.0..6.0)))).collect();
        let mps = nun_sites(&assign).expect("valid").contract().expect("small");
        let spec = assign.iter().enumerate().fold(LatticeSpec::new(Topology::Ring(n)), |s, (k, a)| match a {
            Some((t, g)) => s.with_op(k, nun_site_operator(*t, *g)),
            None => s,
        });
        let dense = build_cluster(&spec, None, DEFAULT_BUDGET).expect("small");
        err = err.max(1.0 - crate::statevec::fidelity(&mps, &dense));
        let open = cluster_sites::<f64>(n, BoundaryMode::Open).expect("valid").contract().expect("small");
        let dense = build_cluster(&LatticeSpec::new(Topology::Chain(n)), None, DEFAULT_BUDGET).expect("small");
        err = err.max(1.0 - crate::statevec::fidelity(&open, &dense));
        let (th, g): (Vec<f64>, Vec<f64>) = (0..n / 2).map(|_| (r.random_range(0.1..1.4), r.random_range(0.0..3.0))).unzip();
        let bub = crate::mps::bub_sites(n + 1, &th, &g).expect("valid").contract().expect("small");
        let spec = (1..n)
            .step_by(2)
            .fold(LatticeSpec::new(Topology::Chain(n + 1)), |s, k| s.with_op(k, d_theta(th[k / 2]) * rz_re(2.0 * g[k / 2])));
        let dense = build_cluster(&spec, None, DEFAULT_BUDGET).expect("small");
        err = err.max(1.0 - crate::statevec::fidelity(&bub, &dense));
    }
    verdict(err, 1e-10)
}

fn check_unitality(_: &Formulas) -> (bool, String) {
    let cl = cluster_sites::<f64>(10, BoundaryMode::Ring).expect("valid");
    let nun = alternating_nun_ring(10, 0.3, 1.1).expect("valid");
    let good =
        cl.bulk_range().chain(nun.bulk_range()).all(|k| cl.unitality_residual(k % 10) < 1e-12 && nun.unitality_residual(k % 10) < 1e-12);
    let bub = crate::mps::bub_sites(7, &[0.3, 0.5, 0.9], &[0.2, 1.0, 2.0]).expect("valid");
    let broken = (1..6).filter(|k| k % 2 == 0).all(|k| bub.unitality_residual(k) > 1e-3);
    (good && broken, format!("cluster/N-U-N unital: {good}; B-U-B odd sites non-unital: {broken}"))
}

fn check_single_n(f: &Formulas) -> (bool, String) {
    let mut r = rng(21);
    let mut err: f64 = 0.0;
    for _ in 0..5 {
        let (theta, gamma) = (r.random_range(0.1..1.4), r.random_range(0.0..6.0));
        let op = nun_site_operator(theta, gamma);
        let n = 10;
        let spec = LatticeSpec::new(Topology::Ring(n)).with_op(5, op);
        let dense = build_cluster(&spec, None, DEFAULT_BUDGET).expect("small");
        let want = (f.single_n_correlator)(theta, gamma);
        err = err.max((two_point(&dense, 4, Pauli::Z, 6, Pauli::Z) - want).abs());
        let mps = ring_with_ops(200, &BTreeMap::from([(100, op)])).expect("valid");
        err = err.max((mps.ring_correlator(99, Pauli::Z, 101, Pauli::Z).expect("finite") - want).abs());
    }
    verdict(err, 1e-10)
}

fn check_alternating(f: &Formulas) -> (bool, String) {
    let mut err: f64 = 0.0;
    for &(theta, gamma) in &[(0.3, 0.4), (0.6, 2.5), (1.1, 1.0)] {
        let ring = alternating_nun_ring(64, theta, gamma).expect("valid");
        let ds: Vec<usize> = (1..=6).map(|j| 2 * j).collect();
        let cs = ring.correlators_from(0, Pauli::Z, Pauli::Z, &ds).expect("finite");
        let half = 32;
        let c = |j| (f.alternating_correlator)(theta, gamma, j);
        for (j, cv) in cs.iter().enumerate() {
            let j = j + 1;
            let ring = (c(j) + c(half - j)) / (1.0 + c(half));
            err = err.max((cv - ring).abs());
        }
    }
    verdict(err, 1e-10)
}

fn check_nun_rotate(_: &Formulas) -> (bool, String) {
    let mut r = rng(22);
    let n = 9;
    let chain = NunChain::random(n, (0.3, 1.2), &mut r).expect("valid");
    let target = RotationTarget::new(0.7, -1.2, 2.2);
    let psi = random_unitary::<f64, _>(&mut r).col(0);
    let mut worst: f64 = 0.0;
    let mut wins = 0;
    for bits in 0..1u32 << (n - 1) {
        let forced = (0..n - 1).map(|j| ((bits >> j) & 1) as u8).collect();
        if let Ok(run) = nun_rotate(&chain, &target, psi, &OutcomeSource::Forced(forced), 60) {
            if run.success() {
                wins += 1;
                worst = worst.max(1.0 - run.fidelity(&target, psi));
            }
        }
    }
    (wins > 0 && worst < 1e-8, format!("{wins} successful branches, worst infidelity {worst:.3e}"))
}

fn check_entangle(_: &Formulas) -> (bool, String) {
    let mut r = rng(23);
    let (n1, _, _) = random_n(&mut r);
    let (n3, _, _) = random_n(&mut r);
    let u2 = random_unitary(&mut r);
    let err = (0..8u8)
        .map(|b| {
            nun_entangle(&EntangleFragment { n1, u2, n3, outcomes: [b >> 2 & 1, b >> 1 & 1, b & 1] }).map_or(f64::INFINITY, |e| e.distance)
        })
        .fold(0.0, f64::max);
    verdict(err.max(crate::protocol::cz_equivalence_residual()), 1e-9)
}

fn check_bub_pair(f: &Formulas) -> (bool, String) {
    let mut r = rng(24);
    let mut err: f64 = 0.0;
    for _ in 0..100 {
        let t: Vec<f64> = (0..3).map(|_| r.random_range(0.05..1.52)).collect();
        let (p0, _) = first_pair_probs(&BubChain::from_thetas(&t).expect("valid")).expect("finite");
        err = err.max((p0 - (f.bub_pair_p0)(t[0], t[1])).abs());
    }
    verdict(err, 1e-10)
}

fn check_walk_oracle(f: &Formulas) -> (bool, String) {
    let mut err: f64 = 0.0;
    for &l in &[0.3, 0.7] {
        err = err.max(bundo_oracle_deviation(l, 4, 10).unwrap_or(f64::INFINITY));
        for k in 1..6 {
            let (a, b) = (f.walker_step)(l, k);
            let (x, y) = step_probs(l, k);
            err = err.max((a - x).abs()).max((b - y).abs());
        }
    }
    verdict(err, 1e-10)
}

fn check_walk_dual(_: &Formulas) -> (bool, String) {
    let mut err: f64 = 0.0;
    for &l in &[0.15, 0.379, 0.6, 0.95] {
        let a = success_dp(l, 12);
        let b = success_enumerated(l, 12).expect("small budget");
        err = a.per_k.iter().zip(&b.per_k).map(|(x, y): (&f64, &f64)| (x - y).abs()).fold(err, f64::max);
    }
    verdict(err, 1e-12)
}

fn check_union_find(_: &Formulas) -> (bool, String) {
    let mismatches = (0..400u64)
        .filter(|&s| {
            let lat = generate(2 + (s as usize % 15), 0.3 + 0.4 * ((s % 7) as f64 / 6.0), s).expect("valid");
            spans(&lat) != spans_bfs(&lat)
        })
        .count();
    (mismatches == 0, format!("{mismatches} union-find/BFS disagreements in 400 lattices"))
}
