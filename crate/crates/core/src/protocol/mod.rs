//! Executable measurement protocols on transformed cluster chains.
//!
//! Sites are 0-based. A logical qubit enters at site 0 before that site's
//! local operator acts; after site `j` is measured it sits on site `j + 1`
//! in the same sense.

mod bub;
mod bundo;
mod entangle;
mod nun;
mod wire;

pub use bub::{bub_rotate, first_pair_probs, walker_toward_condition, BubChain, BubRun};
pub use bundo::{bundo_oracle_deviation, bundo_vertical, vertical_chain, BundoMode, BundoRun};
pub use entangle::{cz_equivalence_residual, entangle_prediction, nun_decouple, nun_entangle, Decoupled, EntangleFragment, EntangleRun};
pub use nun::{nun_rotate, NunChain, NunRun, RotationTarget};
pub use wire::{teleported_map, Wire};

use crate::error::{Error, Result};
use crate::qmath::{hadamard, pauli_x, pauli_z, rx_re, rz_re, Mat2};
use crate::scalar::{cr, Real, C};
use crate::slocc::{strategy1_byproduct_angle, BTypeCanon, NTypeCanon};
use crate::statevec::{MeasurementBasis, ZERO_BRANCH};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// How measurement outcomes are chosen.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutcomeSource {
    Seed(u64),
    Forced(Vec<u8>),
}

pub(crate) enum Chooser {
    Rng(Box<ChaCha8Rng>),
    Forced(Vec<u8>, usize),
}

impl Chooser {
    pub(crate) fn new(src: &OutcomeSource) -> Self {
        match src {
            OutcomeSource::Seed(s) => Chooser::Rng(Box::new(ChaCha8Rng::seed_from_u64(*s))),
            OutcomeSource::Forced(v) => Chooser::Forced(v.clone(), 0),
        }
    }

    pub(crate) fn choose<T: Real>(&mut self, site: usize, p0: T) -> Result<u8> {
        let out = match self {
            Chooser::Rng(r) => u8::from(r.random::<f64>() >= p0.f64()),
            Chooser::Forced(v, i) => {
                let o = *v.get(*i).ok_or_else(|| Error::InvalidArgument(format!("forced outcomes exhausted at site {site}")))?;
                *i += 1;
                o & 1
            }
        };
        let p = if out == 0 { p0 } else { T::one() - p0 };
        if p.f64() < ZERO_BRANCH {
            return Err(Error::ZeroProbabilityBranch { site, outcome: out, prob: p.f64() });
        }
        Ok(out)
    }
}

/// Correction still owed to the logical qubit, beyond the Pauli frame.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pending<T> {
    None,
    /// `Rx(angle)` sits between the frame and the ideal operator.
    Rx(T),
    /// `Rz(angle)·H` sits between the frame and the ideal operator.
    RzH(T),
    /// Accumulated complex z-rotation; the value is its imaginary part.
    ImagRz(T),
}

/// Byproduct descriptor: actual = `X^x Z^z · pending · ideal`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real + Serialize + for<'a> Deserialize<'a>")]
pub struct Byproduct<T> {
    pub x: bool,
    pub z: bool,
    pub pending: Pending<T>,
}

impl<T: Real> Byproduct<T> {
    pub fn clean() -> Self {
        Self { x: false, z: false, pending: Pending::None }
    }

    pub fn pauli(&self) -> Mat2<T> {
        let mut p = Mat2::identity();
        if self.z {
            p = pauli_z() * p;
        }
        if self.x {
            p = pauli_x() * p;
        }
        p
    }
}

/// Role of a measurement within a protocol.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Step<T> {
    /// Teleports `H·Rz(angle)` for program segment `index`.
    Segment { index: usize, angle: T },
    /// Teleports `H` to undo the Hadamard of an errored step.
    CancelH,
    /// Teleports `H·Rz(angle)` to undo a pending rotation.
    CancelRz { angle: T },
    /// Strategy II measurement with real angle `beta`.
    Strategy2 { beta: T },
    /// Fixed `U|±⟩` measurement on a unitary site.
    Plain,
    /// Computational-basis measurement severing a link.
    Sever,
    /// Y-basis measurement on an entangling link.
    Link,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real + Serialize + for<'a> Deserialize<'a>")]
pub struct RecordEntry<T> {
    pub site: usize,
    pub basis: MeasurementBasis<T>,
    pub outcome: u8,
    pub prob: T,
    pub step: Step<T>,
    pub byproduct: Byproduct<T>,
}

/// Ordered measurement log of one protocol run.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real + Serialize + for<'a> Deserialize<'a>")]
pub struct MeasurementRecord<T> {
    pub entries: Vec<RecordEntry<T>>,
}

impl<T: Real> MeasurementRecord<T> {
    pub fn path_probability(&self) -> T {
        self.entries.iter().fold(T::one(), |a, e| a * e.prob)
    }

    pub fn outcomes(&self) -> Vec<u8> {
        self.entries.iter().map(|e| e.outcome).collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Success,
    Exhausted,
}

/// Strategy I basis `{(N†)⁻¹Rz(−ξ)H|0⟩, N·Rz(−ξ)H|1⟩}`, normalised.
/// Outcome 0 teleports `H·Rz(ξ)`, outcome 1 `Rx(μ′)·H·Rz(ξ)`.
pub fn strategy1_basis<T: Real>(n_op: &NTypeCanon<T>, xi: T) -> Result<MeasurementBasis<T>> {
    let n = n_op.matrix();
    let v = rz_re(-xi) * hadamard();
    let a = n.adjoint().inverse()?.apply(v.col(0));
    let b = n.apply(v.col(1));
    MeasurementBasis::from_vectors(a, b, T::lit(1e-10))
}

/// Strategy II basis `{u·U′|0⟩, u·U′|1⟩}` with `U′ = Rz(−β′ − π/2)·Rx(−π/2)`.
/// Outcome m teleports `X^m·H·Rz(β′ + i·ln cot θ)`.
pub fn strategy2_basis<T: Real>(b_op: &BTypeCanon<T>, beta_prime: T) -> MeasurementBasis<T> {
    let up = rz_re(-beta_prime - T::FRAC_PI_2()) * rx_re(-T::FRAC_PI_2());
    let mut b = MeasurementBasis::from_unitary(&(b_op.u * up));
    b.params = Some((beta_prime, T::FRAC_PI_2()));
    b
}

/// Error angle of an outcome-1 Strategy I step with the sign branch `s = ±1`:
/// `ε = s·2·arctan(cos2θ·cos ξ / (1 + s·cos2θ·sin ξ)) + π`.
///
/// It equals the byproduct angle μ′ at `γ = −s·π/2`; in the unitary limit
/// it is π, which is the Pauli X byproduct of a plain cluster.
pub fn epsilon_angle<T: Real>(theta: T, xi: T, sign: i8) -> T {
    let c2 = (theta + theta).cos();
    let s = if sign >= 0 { T::one() } else { -T::one() };
    s * T::lit(2.0) * (c2 * xi.cos() / (T::one() + s * c2 * xi.sin())).atan() + T::PI()
}

/// `ε − π`: the non-Pauli part of the error, zero in the unitary limit.
pub fn epsilon_excess<T: Real>(theta: T, xi: T, sign: i8) -> T {
    epsilon_angle(theta, xi, sign) - T::PI()
}

/// μ′ for a canonical N-type operator.
pub(crate) fn byproduct_angle<T: Real>(n: &NTypeCanon<T>, xi: T) -> T {
    strategy1_byproduct_angle(n.theta, n.gamma, xi)
}

/// True when `Rx(a)` is a Pauli X up to phase.
pub(crate) fn is_pauli_angle<T: Real>(a: T) -> bool {
    let r = (a - T::PI()).rem_euclid_tau();
    r.min(T::TAU() - r) < T::lit(1e-12)
}

trait RemTau {
    fn rem_euclid_tau(self) -> Self;
}

impl<T: Real> RemTau for T {
    fn rem_euclid_tau(self) -> Self {
        let t = T::TAU();
        let r = self % t;
        if r < T::zero() {
            r + t
        } else {
            r
        }
    }
}

pub(crate) fn sign<T: Real>(flip: bool) -> T {
    if flip {
        -T::one()
    } else {
        T::one()
    }
}

pub(crate) fn normalize2<T: Real>(v: [C<T>; 2]) -> [C<T>; 2] {
    let n = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
    [v[0] / cr(n), v[1] / cr(n)]
}
