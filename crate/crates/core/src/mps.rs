//! Matrix product states for long chains and rings: site matrices for the
//! cluster, N-U-N and B-U-B patterns, transfer-matrix correlators and
//! correlation-length fits.

use crate::error::{Error, Result};
use crate::qmath::{d_theta, hadamard, kron, pauli_z, rz_re, DMat, Mat2, Pauli};
use crate::scalar::{c, cis, cr, Real, C};
use crate::statevec::{PureState, DEFAULT_BUDGET};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryMode {
    Open,
    Ring,
}

/// Site tensors `A[0], A[1]` per site. Open chains carry a 1×D row at the
/// first site and a D×1 column at the last.
///
/// The represented physical state is `frame^{⊗n}` applied to the
/// contraction; the cluster matrices live in the Hadamard frame.
#[derive(Clone, Debug)]
pub struct MpsChain<T> {
    pub sites: Vec<[DMat<T>; 2]>,
    pub boundary: BoundaryMode,
    pub frame: Mat2<T>,
    pub canonical_checked: bool,
}

fn m2<T: Real>(a: Mat2<T>) -> DMat<T> {
    DMat::from_mat2(&a)
}

fn row<T: Real>(a: C<T>, b: C<T>) -> DMat<T> {
    DMat { rows: 1, cols: 2, data: vec![a, b] }
}

fn col<T: Real>(a: C<T>, b: C<T>) -> DMat<T> {
    DMat { rows: 2, cols: 1, data: vec![a, b] }
}

fn cluster_bulk<T: Real>() -> [DMat<T>; 2] {
    let s = cr(T::FRAC_1_SQRT_2());
    let h = hadamard::<T>();
    [m2(h.scale(s)), m2((h * pauli_z()).scale(s))]
}

/// Cluster-state matrices: bulk `H/√2`, `HZ/√2`; open boundaries
/// `⟨±|/√2` on the left and `|0⟩`, `|1⟩` on the right.
pub fn cluster_sites<T: Real>(n: usize, boundary: BoundaryMode) -> Result<MpsChain<T>> {
    if n < 2 || (boundary == BoundaryMode::Ring && n < 3) {
        return Err(Error::InvalidArgument(format!("chain of {n} sites too short")));
    }
    let mut sites = vec![cluster_bulk::<T>(); n];
    if boundary == BoundaryMode::Open {
        let h = T::FRAC_1_SQRT_2() * T::FRAC_1_SQRT_2();
        sites[0] = [row(cr(h), cr(h)), row(cr(h), cr(-h))];
        sites[n - 1] = [col(cr(T::one()), cr(T::zero())), col(cr(T::zero()), cr(T::one()))];
    }
    Ok(MpsChain { sites, boundary, frame: hadamard(), canonical_checked: true })
}

/// `A[0] = W/√2`, `A[1] = W·Rz(4θ)/√2` with `W = H·Rz(γ − 2θ)`.
pub fn nun_site_matrices<T: Real>(theta: T, gamma: T) -> [Mat2<T>; 2] {
    let s = cr(T::FRAC_1_SQRT_2());
    let two = T::lit(2.0);
    let w = hadamard() * rz_re(gamma - two * theta);
    [w.scale(s), (w * rz_re(two * two * theta)).scale(s)]
}

/// Physical operator realised by [`nun_site_matrices`] in place of the
/// cluster site: `u·D(θ)·H·Rz(γ)` up to scale, with `u` given by
/// [`nun_site_unitary`].
pub fn nun_site_operator<T: Real>(theta: T, gamma: T) -> Mat2<T> {
    let two = T::lit(2.0);
    let (p0, p1) = ((gamma - two * theta) / two, (gamma + two * theta) / two);
    let mi = c(T::zero(), -T::one());
    let nt = Mat2::new(cr(p0.cos()), mi * cr(p0.sin()), cr(p1.cos()), mi * cr(p1.sin()));
    let h = hadamard();
    h * nt * h
}

/// The unitary `u` with `nun_site_operator = √2·u·D(θ)·H·Rz(γ)`.
pub fn nun_site_unitary<T: Real>(theta: T, gamma: T) -> Result<Mat2<T>> {
    let n = d_theta(theta) * hadamard() * rz_re(gamma);
    Ok(nun_site_operator(theta, gamma) * n.inverse()?.scale(cr(T::FRAC_1_SQRT_2())))
}

/// Ring with N-type matrices on the sites carrying `Some((θ, γ))`.
pub fn nun_sites<T: Real>(assignments: &[Option<(T, T)>]) -> Result<MpsChain<T>> {
    let mut chain = cluster_sites::<T>(assignments.len(), BoundaryMode::Ring)?;
    for (k, a) in assignments.iter().enumerate() {
        if let Some((th, g)) = a {
            let [a0, a1] = nun_site_matrices(*th, *g);
            chain.sites[k] = [m2(a0), m2(a1)];
        }
    }
    Ok(chain)
}

/// Open B-U-B chain exactly as listed for the canonical form, with
/// B-type operators on sites 1, 3, 5, … (0-based). `thetas[j]`, `gammas[j]`
/// belong to site `2j + 1`, which carries `D(θ)·Rz(2γ)`. The length must be
/// odd so that both ends are unit sites.
pub fn bub_sites<T: Real>(n: usize, thetas: &[T], gammas: &[T]) -> Result<MpsChain<T>> {
    if n < 3 || n % 2 == 0 {
        return Err(Error::InvalidArgument("B-U-B chain needs an odd number of sites, at least 3".into()));
    }
    let need = n / 2;
    if thetas.len() < need || gammas.len() < need {
        return Err(Error::InvalidArgument(format!("need {need} B-site parameters")));
    }
    let r = T::FRAC_1_SQRT_2();
    let mut sites = Vec::with_capacity(n);
    let (c2, s2) = (thetas[0].cos(), thetas[0].sin());
    sites.push([row(cr(r * c2), cr(r * s2)), row(cr(r * c2), cr(-r * s2))]);
    for k in 1..n - 1 {
        if k % 2 == 1 {
            let g = gammas[k / 2];
            let z = cr(T::zero());
            sites.push([m2(Mat2::new(z, cis(-g), z, z)), m2(Mat2::new(z, z, cis(g), z))]);
        } else {
            let t = thetas[k / 2];
            let (cc, ss) = (t.cos(), t.sin());
            sites.push([m2(Mat2::from_real(cc, ss, cc, ss)), m2(Mat2::from_real(-cc, ss, cc, -ss))]);
        }
    }
    sites.push([col(cr(r), cr(r)), col(cr(-r), cr(r))]);
    Ok(MpsChain { sites, boundary: BoundaryMode::Open, frame: Mat2::identity(), canonical_checked: false })
}

impl<T: Real> MpsChain<T> {
    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    /// Applies physical operators `S` on chosen sites:
    /// `A′[i] = Σ_j (F†SF)_{ij} A[j]`, `F` the frame.
    pub fn with_site_ops(&self, ops: &BTreeMap<usize, Mat2<T>>) -> Result<Self> {
        let mut out = self.clone();
        let fi = self.frame.inverse()?;
        for (&k, s) in ops {
            if k >= self.len() {
                return Err(Error::SiteOutOfRange { site: k, n: self.len() });
            }
            let st = fi * *s * self.frame;
            let [a0, a1] = &self.sites[k];
            let mix = |i: usize| {
                let mut m = a0.scale(st.m[i][0]);
                for (x, y) in m.data.iter_mut().zip(&a1.data) {
                    *x = *x + st.m[i][1] * *y;
                }
                m
            };
            out.sites[k] = [mix(0), mix(1)];
            out.canonical_checked = false;
        }
        Ok(out)
    }

    fn product_scalar(&self, bits: usize) -> C<T> {
        let n = self.len();
        let mut acc = self.sites[0][(bits >> (n - 1)) & 1].clone();
        for k in 1..n {
            acc = acc.matmul(&self.sites[k][(bits >> (n - 1 - k)) & 1]);
        }
        acc.trace()
    }

    /// Dense contraction including the frame.
    pub fn contract(&self) -> Result<PureState<T>> {
        let n = self.len();
        if (1usize << n) > DEFAULT_BUDGET {
            return Err(Error::TooManyQubits { qubits: n, budget: DEFAULT_BUDGET });
        }
        let amps: Vec<C<T>> = (0..1usize << n).map(|b| self.product_scalar(b)).collect();
        let mut st = PureState::from_amps(n, amps)?;
        for k in 0..n {
            st.apply1(k, &self.frame);
        }
        Ok(st)
    }

    /// `‖Σ_i A[i]·A[i]† − I‖_max` at site `k`.
    pub fn canonical_residual(&self, k: usize) -> T {
        let [a0, a1] = &self.sites[k];
        let s = a0.matmul(&a0.adjoint());
        let t = a1.matmul(&a1.adjoint());
        let mut sum = s.clone();
        for (x, y) in sum.data.iter_mut().zip(&t.data) {
            *x = *x + *y;
        }
        sum.max_abs_diff(&DMat::identity(sum.rows))
    }

    /// Scale-free unitality residual of the site channel: `Σ_i A[i]†·A[i]`
    /// compared with a multiple of the identity.
    pub fn unitality_residual(&self, k: usize) -> T {
        let [a0, a1] = &self.sites[k];
        let mut sum = a0.adjoint().matmul(a0);
        let t = a1.adjoint().matmul(a1);
        for (x, y) in sum.data.iter_mut().zip(&t.data) {
            *x = *x + *y;
        }
        let d = sum.rows;
        let scale = sum.trace().re / T::from_usize(d).expect("dim");
        sum.scale(cr(T::one() / scale)).max_abs_diff(&DMat::identity(d))
    }

    pub fn bulk_range(&self) -> std::ops::Range<usize> {
        match self.boundary {
            BoundaryMode::Ring => 0..self.len(),
            BoundaryMode::Open => 1..self.len() - 1,
        }
    }

    pub fn is_canonical(&self, tol: T) -> bool {
        self.bulk_range().all(|k| self.canonical_residual(k) < tol)
    }

    /// `E = Σ A[j] ⊗ conj(A[i]) · O′_{ij}`, `O′ = F†OF`; identity when `op` is `None`.
    pub fn transfer(&self, k: usize, op: Option<Mat2<T>>) -> DMat<T> {
        let [a0, a1] = &self.sites[k];
        let a = [a0, a1];
        let o = match op {
            None => Mat2::identity(),
            Some(o) => self.frame.adjoint() * o * self.frame,
        };
        let mut e: Option<DMat<T>> = None;
        for i in 0..2 {
            for j in 0..2 {
                let w = o.m[i][j];
                if w.norm() == T::zero() {
                    continue;
                }
                let t = kron(a[j], &conj_mat(a[i])).scale(w);
                e = Some(match e {
                    None => t,
                    Some(mut acc) => {
                        for (x, y) in acc.data.iter_mut().zip(&t.data) {
                            *x = *x + *y;
                        }
                        acc
                    }
                });
            }
        }
        e.expect("nonzero operator")
    }

    /// `⟨ψ| ⊗_k O_k |ψ⟩ / ⟨ψ|ψ⟩` by transfer-matrix contraction.
    pub fn expectation(&self, ops: &[(usize, Pauli)]) -> Result<C<T>> {
        let dressed: BTreeMap<usize, Mat2<T>> = ops.iter().map(|&(k, p)| (k, p.matrix())).collect();
        let z = self.scaled_product(&BTreeMap::new()).norm_trace()?;
        let num = self.scaled_product(&dressed).trace();
        Ok(num.ratio(&z))
    }

    fn scaled_product(&self, dressed: &BTreeMap<usize, Mat2<T>>) -> Scaled<T> {
        let mut acc = Scaled::identity(self.transfer(0, dressed.get(&0).copied()));
        for k in 1..self.len() {
            acc = acc.mul(&self.transfer(k, dressed.get(&k).copied()));
        }
        acc
    }

    /// Connected correlator `⟨A_a B_b⟩ − ⟨A_a⟩⟨B_b⟩` on a ring.
    pub fn ring_correlator(&self, a: usize, op_a: Pauli, b: usize, op_b: Pauli) -> Result<T> {
        self.require_ring()?;
        let ab = self.expectation(&[(a, op_a), (b, op_b)])?;
        let ea = self.expectation(&[(a, op_a)])?;
        let eb = self.expectation(&[(b, op_b)])?;
        Ok((ab - ea * eb).re)
    }

    fn require_ring(&self) -> Result<()> {
        if self.boundary != BoundaryMode::Ring {
            return Err(Error::InvalidArgument("ring boundary required".into()));
        }
        Ok(())
    }

    /// Connected correlators `C(a, a + d)` for every `d` in `distances`,
    /// sharing prefix and suffix transfer products (cost O(n) overall).
    pub fn correlators_from(&self, a: usize, op_a: Pauli, op_b: Pauli, distances: &[usize]) -> Result<Vec<T>> {
        self.require_ring()?;
        let n = self.len();
        let at = |d: usize| (a + d) % n;
        let e: Vec<DMat<T>> = (0..n).map(|d| self.transfer(at(d), None)).collect();
        let ea = self.transfer(a, Some(op_a.matrix()));
        let eb: Vec<DMat<T>> = (0..n).map(|d| self.transfer(at(d), Some(op_b.matrix()))).collect();

        // prefix[d] = E_0 … E_{d-1} (plain) and with E_A at 0; suffix[d] = E_{d+1} … E_{n-1}
        let dim = e[0].rows;
        let mut pre_plain = Vec::with_capacity(n);
        let mut pre_a = Vec::with_capacity(n);
        let mut p = Scaled::identity(DMat::identity(dim));
        let mut q = Scaled::identity(DMat::identity(dim));
        for (d, ed) in e.iter().enumerate() {
            pre_plain.push(p.clone());
            pre_a.push(q.clone());
            p = p.mul(ed);
            q = q.mul(if d == 0 { &ea } else { ed });
        }
        let z = p.norm_trace()?;
        let mean_a = q.trace().ratio(&z).re;
        let mut suf = vec![Scaled::identity(DMat::identity(dim)); n];
        for d in (0..n - 1).rev() {
            suf[d] = Scaled::left_mul(&e[d + 1], &suf[d + 1]);
        }
        distances
            .par_iter()
            .map(|&d| {
                let d = d % n;
                if d == 0 {
                    return Err(Error::InvalidArgument("distance must be nonzero modulo n".into()));
                }
                let ab = pre_a[d].mul(&eb[d]).mul_scaled(&suf[d]).trace().ratio(&z);
                let b = pre_plain[d].mul(&eb[d]).mul_scaled(&suf[d]).trace().ratio(&z);
                Ok(ab.re - mean_a * b.re)
            })
            .collect()
    }
}

fn conj_mat<T: Real>(a: &DMat<T>) -> DMat<T> {
    DMat { rows: a.rows, cols: a.cols, data: a.data.iter().map(|z| z.conj()).collect() }
}

/// Matrix times `e^{log}`, renormalised after each product.
#[derive(Clone, Debug)]
struct Scaled<T> {
    m: DMat<T>,
    log: T,
}

struct ScaledScalar<T> {
    z: C<T>,
    log: T,
}

impl<T: Real> ScaledScalar<T> {
    fn ratio(&self, other: &Self) -> C<T> {
        self.z / other.z * cr((self.log - other.log).exp())
    }
}

impl<T: Real> Scaled<T> {
    fn identity(m: DMat<T>) -> Self {
        Self { m, log: T::zero() }.renorm()
    }

    fn renorm(mut self) -> Self {
        let s = self.m.data.iter().map(|z| z.norm()).fold(T::zero(), T::max);
        if s > T::zero() {
            self.m = self.m.scale(cr(T::one() / s));
            self.log = self.log + s.ln();
        }
        self
    }

    fn mul(&self, b: &DMat<T>) -> Self {
        Self { m: self.m.matmul(b), log: self.log }.renorm()
    }

    fn mul_scaled(&self, b: &Self) -> Self {
        Self { m: self.m.matmul(&b.m), log: self.log + b.log }.renorm()
    }

    fn left_mul(a: &DMat<T>, b: &Self) -> Self {
        Self { m: a.matmul(&b.m), log: b.log }.renorm()
    }

    fn trace(&self) -> ScaledScalar<T> {
        ScaledScalar { z: self.m.trace(), log: self.log }
    }

    /// Trace used as a normaliser; a vanishing value is an error.
    fn norm_trace(&self) -> Result<ScaledScalar<T>> {
        let t = self.trace();
        if t.z.norm() < T::lit(1e-13).max(T::epsilon() * T::lit(64.0)) {
            return Err(Error::IllConditioned);
        }
        Ok(t)
    }
}

/// Least-squares decay fit `|C(d)| ~ exp(−d/L·…)`, reported as `L = −2/slope`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrFit {
    pub length: f64,
    pub slope: f64,
    pub residual: f64,
    pub points: usize,
}

/// Fits `ln|C(a, a+d)|` against `d` for `d = step, 2·step, …` up to
/// `max_distance`, stopping at the first `|C| < 1e-12`.
pub fn correlation_length<T: Real>(
    chain: &MpsChain<T>,
    a: usize,
    ops: (Pauli, Pauli),
    step: usize,
    max_distance: usize,
) -> Result<CorrFit> {
    let ds: Vec<usize> = (1..).map(|j| j * step).take_while(|&d| d <= max_distance.min(chain.len() / 2)).collect();
    let cs = chain.correlators_from(a, ops.0, ops.1, &ds)?;
    let mut pts = Vec::new();
    for (d, c) in ds.iter().zip(&cs) {
        let v = c.f64().abs();
        if v < 1e-12 {
            break;
        }
        pts.push((*d as f64, v.ln()));
    }
    fit_decay(&pts)
}

pub fn fit_decay(pts: &[(f64, f64)]) -> Result<CorrFit> {
    if pts.len() < 4 {
        return Err(Error::InsufficientDecay(pts.len()));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let residual = (pts.iter().map(|p| (p.1 - icpt - slope * p.0).powi(2)).sum::<f64>() / n).sqrt();
    Ok(CorrFit { length: -2.0 / slope, slope, residual, points: pts.len() })
}

/// Alternating N-U-N ring: N-type `(θ, γ)` on odd sites, cluster elsewhere.
pub fn alternating_nun_ring<T: Real>(n: usize, theta: T, gamma: T) -> Result<MpsChain<T>> {
    let assign: Vec<Option<(T, T)>> = (0..n).map(|k| (k % 2 == 1).then_some((theta, gamma))).collect();
    nun_sites(&assign)
}

/// Correlation length of `⟨Z_0 Z_d⟩` on an alternating N-U-N ring, fitted
/// over even distances up to `n/4`.
pub fn nun_ring_length<T: Real>(n: usize, theta: T, gamma: T) -> Result<CorrFit> {
    correlation_length(&alternating_nun_ring(n, theta, gamma)?, 0, (Pauli::Z, Pauli::Z), 2, n / 4)
}

/// Ring built from cluster matrices dressed with arbitrary site operators.
pub fn ring_with_ops<T: Real>(n: usize, ops: &BTreeMap<usize, Mat2<T>>) -> Result<MpsChain<T>> {
    cluster_sites::<T>(n, BoundaryMode::Ring)?.with_site_ops(ops)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::statevec::{build_cluster, fidelity, LatticeSpec, Topology};

    #[test]
    fn cluster_chain_contracts_to_cluster() {
        for n in [2, 3, 4, 6] {
            let mps = cluster_sites::<f64>(n, BoundaryMode::Open).unwrap().contract().unwrap();
            let dense = build_cluster(&LatticeSpec::new(Topology::Chain(n)), None, DEFAULT_BUDGET).unwrap();
            assert!((fidelity(&mps, &dense) - 1.0).abs() < 1e-12, "n={n}");
        }
        for n in [3, 5, 6] {
            let mps = cluster_sites::<f64>(n, BoundaryMode::Ring).unwrap().contract().unwrap();
            let dense = build_cluster(&LatticeSpec::new(Topology::Ring(n)), None, DEFAULT_BUDGET).unwrap();
            assert!((fidelity(&mps, &dense) - 1.0).abs() < 1e-12, "ring n={n}");
        }
    }

    #[test]
    fn cluster_is_canonical_and_unital() {
        let ch = cluster_sites::<f64>(8, BoundaryMode::Ring).unwrap();
        assert!(ch.is_canonical(1e-12));
        assert!((0..8).all(|k| ch.unitality_residual(k) < 1e-12));
    }

    #[test]
    fn nun_operator_is_n_type_with_same_parameters() {
        let (th, g) = (0.3, 1.1);
        let u = nun_site_unitary::<f64>(th, g).unwrap();
        assert!(u.is_unitary(1e-12));
        let s = nun_site_operator::<f64>(th, g);
        let op = crate::slocc::classify(&s).unwrap();
        let nc = crate::slocc::n_canon(&op).unwrap();
        assert!((nc.theta - th).abs() < 1e-12 && (nc.gamma - g).abs() < 1e-12);
    }

    #[test]
    fn nun_unitary_limit_is_regauged_cluster() {
        let ch = nun_sites::<f64>(&[Some((std::f64::consts::FRAC_PI_4, 0.0)), None, None, None]).unwrap();
        assert!(ch.is_canonical(1e-12));
        let u = nun_site_operator::<f64>(std::f64::consts::FRAC_PI_4, 0.0);
        assert!(u.is_unitary(1e-12));
    }

    #[test]
    fn prefix_correlators_match_direct() {
        let ch = alternating_nun_ring::<f64>(12, 0.3, 1.1).unwrap();
        let ds = [1, 2, 3, 4, 6];
        let fast = ch.correlators_from(0, Pauli::Z, Pauli::Z, &ds).unwrap();
        for (d, f) in ds.iter().zip(&fast) {
            let slow = ch.ring_correlator(0, Pauli::Z, *d, Pauli::Z).unwrap();
            assert!((f - slow).abs() < 1e-13);
        }
    }

    #[test]
    fn fit_needs_four_points() {
        assert_eq!(fit_decay(&[(1.0, 0.0), (2.0, -1.0)]), Err(Error::InsufficientDecay(2)));
        let f = fit_decay(&[(2.0, -1.0), (4.0, -2.0), (6.0, -3.0), (8.0, -4.0)]).unwrap();
        assert!((f.length - 4.0).abs() < 1e-12 && f.residual < 1e-12);
    }
}
