use crate::error::{Error, Result};
use crate::qmath::{ket_minus, ket_plus, rz, Mat2};
use crate::scalar::{c, Real, C};
use crate::statevec::{build_cluster_raw, LatticeSpec, PureState, Topology, DEFAULT_BUDGET};
use crate::walk::step_probs;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BundoMode {
    /// Walker driven by the closed-form step probabilities.
    Sample { seed: u64 },
    /// Dense simulation of the vertical chain with `n_sites` qubits.
    Statevec { seed: u64, n_sites: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BundoRun {
    pub success: bool,
    /// Even-site measurements made.
    pub steps: usize,
    /// Signed walker position, starting at 1; the root carries
    /// `Rz(i·s·ln λ)` up to Pauli byproducts.
    pub path: Vec<i64>,
    /// Probability of each realised even-site outcome.
    pub probs: Vec<f64>,
    /// Largest gap between Born and closed-form step probabilities seen
    /// along the path (statevec mode only).
    pub formula_deviation: Option<f64>,
}

/// Vertical chain: `Rz(i·ln λ)` on even sites (the root is site 0), identity
/// on odd sites.
pub fn vertical_chain<T: Real>(lambda: T, n_sites: usize) -> Vec<Mat2<T>> {
    let b = rz(c(T::zero(), lambda.ln()));
    (0..n_sites).map(|j| if j % 2 == 0 { b } else { Mat2::identity() }).collect()
}

fn outcome_toward(s: i64) -> u8 {
    u8::from(s > 0)
}

fn next_position(s: i64, m_even: u8) -> i64 {
    if m_even == 1 {
        1 - s
    } else {
        s + 1
    }
}

fn x_vec<T: Real>(m: u8) -> [C<T>; 2] {
    if m == 0 {
        ket_plus()
    } else {
        ket_minus()
    }
}

/// Joint branches of the next (even, odd) pair, which always sit at
/// positions 1 and 2 of the reduced state.
fn pair_branches<T: Real>(st: &PureState<T>) -> Result<[[PureState<T>; 2]; 2]> {
    let mut out: Vec<[PureState<T>; 2]> = Vec::with_capacity(2);
    for me in 0..2u8 {
        let a = st.project_out(2, &x_vec(0))?.project_out(1, &x_vec(me))?;
        let b = st.project_out(2, &x_vec(1))?.project_out(1, &x_vec(me))?;
        out.push([a, b]);
    }
    let b = out.pop().expect("two");
    let a = out.pop().expect("two");
    Ok([a, b])
}

fn even_probs<T: Real>(br: &[[PureState<T>; 2]; 2]) -> (f64, f64) {
    let w: Vec<f64> = br.iter().map(|p| (p[0].norm_sqr() + p[1].norm_sqr()).f64()).collect();
    let tot = w[0] + w[1];
    (w[0] / tot, w[1] / tot)
}

/// One run of the vertical-chain B-undo: measure (even, odd) pairs in the X
/// basis until the walker is absorbed at 0 or `max_even` even sites are used.
pub fn bundo_vertical<T: Real>(lambda: T, max_even: usize, mode: BundoMode) -> Result<BundoRun> {
    if !(lambda > T::zero() && lambda < T::one()) {
        return Err(Error::InvalidArgument(format!("lambda {} outside (0, 1)", lambda)));
    }
    let mut s = 1i64;
    let mut path = vec![s];
    let mut probs = Vec::new();
    match mode {
        BundoMode::Sample { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            while s != 0 && probs.len() < max_even {
                let (_, toward) = step_probs(lambda, s.unsigned_abs() as usize);
                let go = rng.random::<f64>() < toward.f64();
                let m = if go { outcome_toward(s) } else { 1 - outcome_toward(s) };
                probs.push(if go { toward.f64() } else { 1.0 - toward.f64() });
                s = next_position(s, m);
                path.push(s);
            }
            Ok(BundoRun { success: s == 0, steps: probs.len(), path, probs, formula_deviation: None })
        }
        BundoMode::Statevec { seed, n_sites } => {
            if n_sites < 4 {
                return Err(Error::InvalidArgument("vertical chain needs at least 4 sites".into()));
            }
            let budget = max_even.min((n_sites - 2) / 2);
            let spec = chain_spec(lambda, n_sites);
            let mut st = build_cluster_raw(&spec, &[], DEFAULT_BUDGET)?.normalized();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut dev = 0.0f64;
            while s != 0 && probs.len() < budget {
                let br = pair_branches(&st)?;
                let (p0, p1) = even_probs(&br);
                let toward = step_probs(lambda, s.unsigned_abs() as usize).1.f64();
                let born_toward = if outcome_toward(s) == 1 { p1 } else { p0 };
                dev = dev.max((born_toward - toward).abs());
                let me = u8::from(rng.random::<f64>() >= p0);
                let pair = &br[me as usize];
                let (w0, w1) = (pair[0].norm_sqr().f64(), pair[1].norm_sqr().f64());
                let mo = usize::from(rng.random::<f64>() * (w0 + w1) >= w0);
                st = pair[mo].clone().normalized();
                probs.push(if me == 0 { p0 } else { p1 });
                s = next_position(s, me);
                path.push(s);
            }
            Ok(BundoRun { success: s == 0, steps: probs.len(), path, probs, formula_deviation: Some(dev) })
        }
    }
}

fn chain_spec<T: Real>(lambda: T, n_sites: usize) -> LatticeSpec<T> {
    vertical_chain(lambda, n_sites)
        .into_iter()
        .enumerate()
        .fold(LatticeSpec::new(Topology::Chain(n_sites)), |spec, (j, op)| spec.with_op(j, op))
}

/// Largest gap between the closed-form step probabilities and the Born
/// probabilities of the dense chain, over every outcome history of up to
/// `steps` pairs (both even and odd outcomes are branched).
pub fn bundo_oracle_deviation<T: Real>(lambda: T, steps: usize, n_sites: usize) -> Result<f64> {
    if n_sites < 2 * steps + 2 {
        return Err(Error::InvalidArgument(format!("{n_sites} sites cannot hold {steps} pairs")));
    }
    let st = build_cluster_raw(&chain_spec(lambda, n_sites), &[], DEFAULT_BUDGET)?.normalized();
    let mut worst = 0.0f64;
    walk_branches(lambda, &st, 1, steps, &mut worst)?;
    Ok(worst)
}

fn walk_branches<T: Real>(lambda: T, st: &PureState<T>, s: i64, left: usize, worst: &mut f64) -> Result<()> {
    if s == 0 || left == 0 {
        return Ok(());
    }
    let br = pair_branches(st)?;
    let (p0, p1) = even_probs(&br);
    let toward = step_probs(lambda, s.unsigned_abs() as usize).1.f64();
    let born = if outcome_toward(s) == 1 { p1 } else { p0 };
    *worst = worst.max((born - toward).abs());
    for (me, pair) in br.iter().enumerate() {
        for b in pair {
            if b.norm_sqr().f64() > 1e-24 {
                walk_branches(lambda, &b.clone().normalized(), next_position(s, me as u8), left - 1, worst)?;
            }
        }
    }
    Ok(())
}
