use super::{normalize2, Chooser};
use crate::error::{Error, Result};
use crate::qmath::{hadamard, Mat2};
use crate::scalar::{cr, Real, C};
use crate::statevec::MeasurementBasis;

/// Map teleported by measuring a site carrying `op` onto `⟨v|`:
/// `H·diag(⟨v|op|0⟩, ⟨v|op|1⟩)`.
pub fn teleported_map<T: Real>(op: &Mat2<T>, v: &[C<T>; 2]) -> Mat2<T> {
    let a = v[0].conj() * op.m[0][0] + v[1].conj() * op.m[1][0];
    let b = v[0].conj() * op.m[0][1] + v[1].conj() * op.m[1][1];
    hadamard() * Mat2::diag(a, b)
}

fn entrywise<T: Real>(a: &Mat2<T>, b: &Mat2<T>) -> Mat2<T> {
    let mut m = Mat2::zero();
    for i in 0..2 {
        for j in 0..2 {
            m.m[i][j] = a.m[i][j] * b.m[i][j];
        }
    }
    m
}

/// Exact sequential measurement of a transformed cluster chain.
///
/// The unmeasured tail starting at site `k` with logical input φ has squared
/// norm `φ†·W_k·φ`, where `W_last = S†S` and `W_k = S_k†S_k ∘ (H·W_{k+1}·H)`
/// with `∘` the entrywise product. Each step therefore costs O(1).
#[derive(Clone, Debug)]
pub struct Wire<T> {
    ops: Vec<Mat2<T>>,
    metrics: Vec<Mat2<T>>,
    phi: [C<T>; 2],
    next: usize,
}

impl<T: Real> Wire<T> {
    pub fn new(ops: Vec<Mat2<T>>, input: [C<T>; 2]) -> Result<Self> {
        if ops.is_empty() {
            return Err(Error::InvalidArgument("empty chain".into()));
        }
        let n = ops.len();
        let h = hadamard::<T>();
        let mut metrics = vec![Mat2::identity(); n + 1];
        for k in (0..n).rev() {
            let t = ops[k].adjoint() * ops[k];
            let w = if k + 1 == n { t } else { entrywise(&t, &(h * metrics[k + 1] * h)) };
            let tr = w.trace().re;
            metrics[k] = w.scale(cr(T::one() / tr));
        }
        Ok(Self { ops, metrics, phi: normalize2(input), next: 0 })
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    /// Index of the site holding the logical qubit.
    pub fn site(&self) -> usize {
        self.next
    }

    pub fn op(&self, site: usize) -> &Mat2<T> {
        &self.ops[site]
    }

    /// Normalised logical state, as the input before the current site's operator.
    pub fn logical(&self) -> [C<T>; 2] {
        self.phi
    }

    fn weight(&self, v: &[C<T>; 2]) -> T {
        let w = &self.metrics[self.next + 1];
        let wv = w.apply(*v);
        (v[0].conj() * wv[0] + v[1].conj() * wv[1]).re
    }

    /// Born probabilities of measuring the current site in `basis`.
    pub fn probs(&self, basis: &MeasurementBasis<T>) -> Result<(T, T)> {
        if self.next >= self.ops.len() {
            return Err(Error::ChainExhausted { sites_used: self.next });
        }
        let op = &self.ops[self.next];
        let w0 = self.weight(&teleported_map(op, &basis.m).apply(self.phi));
        let w1 = self.weight(&teleported_map(op, &basis.m_perp).apply(self.phi));
        let tot = w0 + w1;
        Ok((w0 / tot, w1 / tot))
    }

    /// Measures the current site; returns the outcome and its probability.
    pub(crate) fn measure(&mut self, basis: &MeasurementBasis<T>, chooser: &mut Chooser) -> Result<(u8, T)> {
        let (p0, p1) = self.probs(basis)?;
        let out = chooser.choose(self.next, p0)?;
        self.apply_outcome(basis, out);
        Ok((out, if out == 0 { p0 } else { p1 }))
    }

    /// Projects the current site onto the given outcome without sampling.
    pub fn force(&mut self, basis: &MeasurementBasis<T>, outcome: u8) -> Result<T> {
        let (p0, p1) = self.probs(basis)?;
        let p = if outcome == 0 { p0 } else { p1 };
        if p.f64() < crate::statevec::ZERO_BRANCH {
            return Err(Error::ZeroProbabilityBranch { site: self.next, outcome, prob: p.f64() });
        }
        self.apply_outcome(basis, outcome);
        Ok(p)
    }

    fn apply_outcome(&mut self, basis: &MeasurementBasis<T>, outcome: u8) {
        let m = teleported_map(&self.ops[self.next], &basis.vector(outcome));
        self.phi = normalize2(m.apply(self.phi));
        self.next += 1;
    }
}
