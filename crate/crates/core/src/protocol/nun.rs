use super::{
    byproduct_angle, is_pauli_angle, sign, strategy1_basis, Byproduct, Chooser, MeasurementRecord, OutcomeSource, Pending, RecordEntry,
    RunStatus, Step, Wire,
};
use crate::error::{Error, Result};
use crate::qmath::{d_theta, hadamard, rx_re, rz_re, Mat2};
use crate::scalar::{Real, C};
use crate::slocc::{classify, n_canon, NTypeCanon};
use crate::statevec::{vec_fidelity, MeasurementBasis};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// `U(ζ, η, ξ) = Rx(ζ)·Rz(η)·Rx(ξ)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RotationTarget<T> {
    pub zeta: T,
    pub eta: T,
    pub xi: T,
}

impl<T: Real> RotationTarget<T> {
    pub fn new(zeta: T, eta: T, xi: T) -> Self {
        Self { zeta, eta, xi }
    }

    pub fn matrix(&self) -> Mat2<T> {
        rx_re(self.zeta) * rz_re(self.eta) * rx_re(self.xi)
    }

    /// Angles of the four `H·Rz(a)` segments, in teleportation order, whose
    /// product is the target.
    pub fn segments(&self) -> [T; 4] {
        [T::zero(), self.xi, self.eta, self.zeta]
    }
}

/// Chain with N-type operators on even sites and unitaries on odd sites.
#[derive(Clone, Debug)]
pub struct NunChain<T> {
    ops: Vec<Mat2<T>>,
    canon: Vec<Option<NTypeCanon<T>>>,
}

impl<T: Real> NunChain<T> {
    pub fn new(ops: Vec<Mat2<T>>) -> Result<Self> {
        if ops.len() < 2 {
            return Err(Error::InvalidArgument("chain needs at least two sites".into()));
        }
        let mut canon = Vec::with_capacity(ops.len());
        for (j, op) in ops.iter().enumerate() {
            let c = classify(op)?;
            if j % 2 == 0 {
                canon.push(Some(n_canon(&c)?));
            } else {
                if !c.flags.is_unitary {
                    return Err(Error::InvalidArgument(format!("site {j} must carry a unitary")));
                }
                canon.push(None);
            }
        }
        Ok(Self { ops, canon })
    }

    /// Every even site carries `D(θ)·H·Rz(γ)`, every odd site the identity.
    pub fn uniform(n: usize, theta: T, gamma: T) -> Result<Self> {
        let nop = d_theta(theta) * hadamard() * rz_re(gamma);
        Self::new((0..n).map(|j| if j % 2 == 0 { nop } else { Mat2::identity() }).collect())
    }

    /// Random unitaries everywhere, θ uniform in `theta_range` and γ uniform
    /// on the even sites.
    pub fn random<R: Rng + ?Sized>(n: usize, theta_range: (T, T), rng: &mut R) -> Result<Self> {
        let ops = (0..n)
            .map(|j| {
                let u = crate::qmath::random_unitary(rng);
                if j % 2 == 0 {
                    let t = theta_range.0 + (theta_range.1 - theta_range.0) * T::lit(rng.random::<f64>());
                    let g = T::TAU() * T::lit(rng.random::<f64>());
                    u * d_theta(t) * hadamard() * rz_re(g)
                } else {
                    u
                }
            })
            .collect();
        Self::new(ops)
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn ops(&self) -> &[Mat2<T>] {
        &self.ops
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(bound = "T: Real + Serialize + for<'a> Deserialize<'a>")]
pub struct NunRun<T> {
    pub record: MeasurementRecord<T>,
    pub status: RunStatus,
    /// Logical state on site `sites_used`, before that site's operator.
    pub logical: [C<T>; 2],
    pub byproduct: Byproduct<T>,
    pub sites_used: usize,
}

impl<T: Real> NunRun<T> {
    pub fn success(&self) -> bool {
        self.status == RunStatus::Success
    }

    /// Fidelity of the logical state with `X^x Z^z · U · ψ`.
    pub fn fidelity(&self, target: &RotationTarget<T>, input: [C<T>; 2]) -> T {
        let want = (self.byproduct.pauli() * target.matrix()).apply(input);
        vec_fidelity(&self.logical, &want)
    }

    pub fn into_result(self) -> Result<Self> {
        match self.status {
            RunStatus::Success => Ok(self),
            RunStatus::Exhausted => Err(Error::ChainExhausted { sites_used: self.sites_used }),
        }
    }
}

#[derive(Clone, Copy)]
enum Mode<T> {
    Clean,
    PendingRx(T),
    PendingRzH(T),
}

/// Repeat-until-success teleportation of `Rx(ζ)Rz(η)Rx(ξ)` along an N-U-N
/// chain.
///
/// The frame `(x, z)` means actual = `X^x Z^z · ideal`. An outcome-1 N step
/// leaves `Rx(e)`; the next (unitary) site teleports `H`, turning it into
/// `Rz(e)·H`, and the following N site teleports `H·Rz(∓e)` to cancel both.
/// A failure there starts a new episode. At most `max_sites` measurements
/// are made and the last chain site is never measured.
pub fn nun_rotate<T: Real>(
    chain: &NunChain<T>,
    target: &RotationTarget<T>,
    input: [C<T>; 2],
    source: &OutcomeSource,
    max_sites: usize,
) -> Result<NunRun<T>> {
    let mut wire = Wire::new(chain.ops.clone(), input)?;
    let mut chooser = Chooser::new(source);
    let limit = max_sites.min(chain.len() - 1);
    let seg = target.segments();
    let (mut x, mut z) = (false, false);
    let mut s = 0usize;
    let mut mode = Mode::Clean;
    let mut record = MeasurementRecord { entries: Vec::new() };
    let status = loop {
        if matches!(mode, Mode::Clean) && s == seg.len() {
            break RunStatus::Success;
        }
        let site = wire.site();
        if site >= limit {
            break RunStatus::Exhausted;
        }
        let canon = chain.canon[site].as_ref();
        let u = chain.ops[site];
        let (basis, step): (MeasurementBasis<T>, Step<T>) = match mode {
            Mode::Clean => {
                let alpha = sign::<T>(x) * seg[s];
                let b = match canon {
                    Some(n) => strategy1_basis(n, alpha)?,
                    None => MeasurementBasis::xy(alpha).rotated(&u),
                };
                (b, Step::Segment { index: s, angle: alpha })
            }
            Mode::PendingRx(_) => (MeasurementBasis::xy(T::zero()).rotated(&u), Step::CancelH),
            Mode::PendingRzH(e) => {
                let chi = -sign::<T>(x) * e;
                let n = canon.ok_or_else(|| Error::InvalidArgument(format!("site {site} is not N-type")))?;
                (strategy1_basis(n, chi)?, Step::CancelRz { angle: chi })
            }
        };
        if let (Mode::PendingRx(_), Some(_)) = (mode, canon) {
            return Err(Error::InvalidArgument(format!("site {site} must be unitary")));
        }
        let (m, p) = wire.measure(&basis, &mut chooser)?;
        let bit = m == 1;
        let x_old = x;
        match (mode, canon) {
            (Mode::Clean, None) | (Mode::PendingRx(_), None) => {
                (x, z) = (z ^ bit, x);
            }
            (Mode::Clean, Some(_)) | (Mode::PendingRzH(_), Some(_)) => {
                (x, z) = (z, x);
                if bit {
                    let angle = match step {
                        Step::Segment { angle, .. } | Step::CancelRz { angle } => angle,
                        _ => unreachable!(),
                    };
                    let mu = byproduct_angle(canon.expect("N site"), angle);
                    if is_pauli_angle(mu) {
                        x = !x;
                    }
                }
            }
            _ => unreachable!(),
        }
        let angle_of = |st: &Step<T>| match *st {
            Step::Segment { angle, .. } | Step::CancelRz { angle } => angle,
            _ => T::zero(),
        };
        mode = match (mode, canon) {
            (Mode::Clean, None) => {
                s += 1;
                Mode::Clean
            }
            (Mode::Clean, Some(n)) => {
                s += 1;
                let mu = byproduct_angle(n, angle_of(&step));
                if bit && !is_pauli_angle(mu) {
                    Mode::PendingRx(sign::<T>(x_old) * mu)
                } else {
                    Mode::Clean
                }
            }
            (Mode::PendingRx(e), None) => Mode::PendingRzH(e),
            (Mode::PendingRzH(_), Some(n)) => {
                let mu = byproduct_angle(n, angle_of(&step));
                if bit && !is_pauli_angle(mu) {
                    Mode::PendingRx(sign::<T>(x_old) * mu)
                } else {
                    Mode::Clean
                }
            }
            _ => unreachable!(),
        };
        let pending = match mode {
            Mode::Clean => Pending::None,
            Mode::PendingRx(e) => Pending::Rx(e),
            Mode::PendingRzH(e) => Pending::RzH(e),
        };
        record.entries.push(RecordEntry { site, basis, outcome: m, prob: p, step, byproduct: Byproduct { x, z, pending } });
    };
    let pending = match mode {
        Mode::Clean => Pending::None,
        Mode::PendingRx(e) => Pending::Rx(e),
        Mode::PendingRzH(e) => Pending::RzH(e),
    };
    Ok(NunRun { record, status, logical: wire.logical(), byproduct: Byproduct { x, z, pending }, sites_used: wire.site() })
}
