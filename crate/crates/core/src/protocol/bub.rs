use super::{sign, strategy2_basis, Byproduct, Chooser, MeasurementRecord, OutcomeSource, Pending, RecordEntry, RunStatus, Step, Wire};
use crate::error::{Error, Result};
use crate::qmath::{d_theta, hadamard, rz, Mat2};
use crate::scalar::{c, Real, C};
use crate::slocc::{b_canon, classify, BTypeCanon};
use crate::statevec::{vec_fidelity, MeasurementBasis};
use serde::{Deserialize, Serialize};

/// Chain with B-type operators on even sites and unitaries on odd sites.
#[derive(Clone, Debug)]
pub struct BubChain<T> {
    ops: Vec<Mat2<T>>,
    canon: Vec<Option<BTypeCanon<T>>>,
}

impl<T: Real> BubChain<T> {
    pub fn new(ops: Vec<Mat2<T>>) -> Result<Self> {
        if ops.len() < 2 {
            return Err(Error::InvalidArgument("chain needs at least two sites".into()));
        }
        let mut canon = Vec::with_capacity(ops.len());
        for (j, op) in ops.iter().enumerate() {
            let c = classify(op)?;
            if j % 2 == 0 {
                canon.push(Some(b_canon(&c)?));
            } else {
                if !c.flags.is_unitary {
                    return Err(Error::InvalidArgument(format!("site {j} must carry a unitary")));
                }
                canon.push(None);
            }
        }
        Ok(Self { ops, canon })
    }

    /// `D(θ_j)` on even site `2j`, identity on odd sites.
    pub fn from_thetas(thetas: &[T]) -> Result<Self> {
        let mut ops = Vec::with_capacity(2 * thetas.len());
        for (j, t) in thetas.iter().enumerate() {
            ops.push(d_theta(*t));
            if j + 1 < thetas.len() {
                ops.push(Mat2::identity());
            }
        }
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

    /// `ln cot θ` of the B site at `site`.
    pub fn step_length(&self, site: usize) -> Option<T> {
        self.canon[site].map(|b| b.eps_im)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(bound = "T: Real + Serialize + for<'a> Deserialize<'a>")]
pub struct BubRun<T> {
    pub record: MeasurementRecord<T>,
    /// Imaginary part of the accumulated rotation after each odd-site measurement.
    pub walker: Vec<T>,
    pub status: RunStatus,
    pub logical: [C<T>; 2],
    pub byproduct: Byproduct<T>,
    /// Accumulated complex z-rotation angle.
    pub angle: C<T>,
    pub sites_used: usize,
}

impl<T: Real> BubRun<T> {
    pub fn success(&self) -> bool {
        self.status == RunStatus::Success
    }

    /// Fidelity of the logical state with `X^x Z^z · Rz(η) · ψ`.
    pub fn fidelity(&self, eta: T, input: [C<T>; 2]) -> T {
        let want = (self.byproduct.pauli() * rz(c(eta, T::zero()))).apply(input);
        vec_fidelity(&self.logical, &want)
    }

    pub fn into_result(self) -> Result<Self> {
        match self.status {
            RunStatus::Success => Ok(self),
            RunStatus::Exhausted => Err(Error::ChainExhausted { sites_used: self.sites_used }),
        }
    }
}

/// Probabilistic teleportation of `Rz(η)` along a B-U-B chain.
///
/// Each (B, U) pair teleports `X^{m_U} Z^{m_B} · Rz(β′ + i·ln cot θ)`. The
/// real part is steered onto η by β′; the imaginary part walks with a step
/// sign flipped by every outcome 1 on a unitary site. The run succeeds when
/// the walker returns within `tol` of the origin after a unitary site.
pub fn bub_rotate<T: Real>(
    chain: &BubChain<T>,
    eta: T,
    input: [C<T>; 2],
    source: &OutcomeSource,
    max_sites: usize,
    tol: T,
) -> Result<BubRun<T>> {
    let mut wire = Wire::new(chain.ops.clone(), input)?;
    let mut chooser = Chooser::new(source);
    let limit = max_sites.min(chain.len() - 1);
    let (mut x, mut z) = (false, false);
    let mut acc = c(T::zero(), T::zero());
    let mut record = MeasurementRecord { entries: Vec::new() };
    let mut walker = Vec::new();
    let status = loop {
        let site = wire.site();
        if site + 1 > limit || (site % 2 == 0 && site + 2 > limit) {
            break RunStatus::Exhausted;
        }
        let (basis, step) = match chain.canon[site] {
            Some(b) => {
                let beta = sign::<T>(x) * (eta - acc.re);
                (strategy2_basis(&b, beta), Step::Strategy2 { beta })
            }
            None => (MeasurementBasis::from_unitary(&(chain.ops[site] * hadamard())), Step::Plain),
        };
        let (m, p) = wire.measure(&basis, &mut chooser)?;
        let bit = m == 1;
        if let (Some(b), Step::Strategy2 { beta }) = (chain.canon[site], step) {
            acc = acc + c(beta, b.eps_im) * sign::<T>(x);
        }
        (x, z) = (z ^ bit, x);
        let done = chain.canon[site].is_none() && acc.im.abs() <= tol;
        if chain.canon[site].is_none() {
            walker.push(acc.im);
        }
        record.entries.push(RecordEntry {
            site,
            basis,
            outcome: m,
            prob: p,
            step,
            byproduct: Byproduct { x, z, pending: Pending::ImagRz(acc.im) },
        });
        if done {
            break RunStatus::Success;
        }
    };
    Ok(BubRun {
        record,
        walker,
        status,
        logical: wire.logical(),
        byproduct: Byproduct { x, z, pending: Pending::ImagRz(acc.im) },
        angle: acc,
        sites_used: wire.site(),
    })
}

/// Outcome probabilities of the second site when the first two sites of a
/// B-U-B chain are measured in `{|+⟩, |−⟩}`, from the exact wire simulation.
pub fn first_pair_probs<T: Real>(chain: &BubChain<T>) -> Result<(T, T)> {
    let start = Wire::new(chain.ops.clone(), crate::qmath::ket_plus())?;
    let x = MeasurementBasis::x();
    let second = MeasurementBasis::from_unitary(&(chain.ops[1] * hadamard()));
    let (q0, q1) = start.probs(&x)?;
    let mut p0 = T::zero();
    for (m, q) in [(0u8, q0), (1u8, q1)] {
        if q.f64() < 1e-14 {
            continue;
        }
        let mut w = start.clone();
        w.force(&x, m)?;
        p0 = p0 + q * w.probs(&second)?.0;
    }
    Ok((p0, T::one() - p0))
}

/// Conditions under which the walker at `ln tan θ₁` is held to step towards
/// the origin: for either sign σ, `|ln tan θ₁ + σ·ln tan θ₃| > 2·|ln tan θ₁|`
/// together with `σ·cos2θ₁·cos2θ₃ > 0`.
pub fn walker_toward_condition<T: Real>(theta1: T, theta3: T) -> bool {
    let a = theta1.tan().ln();
    let b = theta3.tan().ln();
    let cc = (theta1 + theta1).cos() * (theta3 + theta3).cos();
    let two = T::lit(2.0);
    ((a + b).abs() > two * a.abs() && cc > T::zero()) || ((a - b).abs() > two * a.abs() && cc < T::zero())
}
