//! Complex linear algebra for qubits: 2×2 matrices, gates, small dense
//! matrices, Kronecker products and the 2×2 singular value decomposition.

use crate::error::{Error, Result};
use crate::scalar::{c, cf, cis, cr, from_c64, to_c64, Real, C};
use nalgebra::DMatrix;
use num_complex::Complex;
use serde::{Deserialize, Serialize};
use std::ops::{Add, Mul, Sub};

/// A 2×2 complex matrix stored row-major.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real + Serialize + for<'a> Deserialize<'a>")]
pub struct Mat2<T> {
    pub m: [[C<T>; 2]; 2],
}

impl<T: Real> Mat2<T> {
    pub fn new(a: C<T>, b: C<T>, cc: C<T>, d: C<T>) -> Self {
        Self { m: [[a, b], [cc, d]] }
    }

    pub fn from_real(a: T, b: T, cc: T, d: T) -> Self {
        Self::new(cr(a), cr(b), cr(cc), cr(d))
    }

    pub fn identity() -> Self {
        Self::from_real(T::one(), T::zero(), T::zero(), T::one())
    }

    pub fn zero() -> Self {
        Self::from_real(T::zero(), T::zero(), T::zero(), T::zero())
    }

    pub fn diag(a: C<T>, d: C<T>) -> Self {
        Self::new(a, C::new(T::zero(), T::zero()), C::new(T::zero(), T::zero()), d)
    }

    /// Matrix with the given columns.
    pub fn from_cols(c0: [C<T>; 2], c1: [C<T>; 2]) -> Self {
        Self::new(c0[0], c1[0], c0[1], c1[1])
    }

    pub fn col(&self, j: usize) -> [C<T>; 2] {
        [self.m[0][j], self.m[1][j]]
    }

    pub fn adjoint(&self) -> Self {
        let m = &self.m;
        Self::new(m[0][0].conj(), m[1][0].conj(), m[0][1].conj(), m[1][1].conj())
    }

    pub fn transpose(&self) -> Self {
        let m = &self.m;
        Self::new(m[0][0], m[1][0], m[0][1], m[1][1])
    }

    pub fn conj(&self) -> Self {
        self.map(|z| z.conj())
    }

    pub fn map(&self, f: impl Fn(C<T>) -> C<T>) -> Self {
        let m = &self.m;
        Self::new(f(m[0][0]), f(m[0][1]), f(m[1][0]), f(m[1][1]))
    }

    pub fn scale(&self, s: C<T>) -> Self {
        self.map(|z| z * s)
    }

    pub fn det(&self) -> C<T> {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    pub fn trace(&self) -> C<T> {
        self.m[0][0] + self.m[1][1]
    }

    pub fn frob_norm(&self) -> T {
        self.entries().iter().map(|z| z.norm_sqr()).sum::<T>().sqrt()
    }

    pub fn entries(&self) -> [C<T>; 4] {
        [self.m[0][0], self.m[0][1], self.m[1][0], self.m[1][1]]
    }

    pub fn is_finite(&self) -> bool {
        self.entries().iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// `|det| > tol·‖m‖²`.
    pub fn is_invertible(&self, tol: T) -> bool {
        let n = self.frob_norm();
        self.is_finite() && n > T::zero() && self.det().norm() > tol * n * n
    }

    pub fn inverse(&self) -> Result<Self> {
        if !self.is_invertible(T::lit(1e-12).max(T::epsilon())) {
            return Err(Error::SingularInput);
        }
        let d = self.det();
        let m = &self.m;
        Ok(Self::new(m[1][1] / d, -m[0][1] / d, -m[1][0] / d, m[0][0] / d))
    }

    pub fn apply(&self, v: [C<T>; 2]) -> [C<T>; 2] {
        [self.m[0][0] * v[0] + self.m[0][1] * v[1], self.m[1][0] * v[0] + self.m[1][1] * v[1]]
    }

    pub fn is_unitary(&self, tol: T) -> bool {
        (self.adjoint() * *self).max_abs_diff(&Self::identity()) < tol
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.entries().iter().zip(other.entries().iter()).map(|(a, b)| (*a - *b).norm()).fold(T::zero(), T::max)
    }

    /// Integer power by repeated multiplication.
    pub fn pow(&self, k: u32) -> Self {
        (0..k).fold(Self::identity(), |acc, _| acc * *self)
    }

    /// Distance between operators modulo a complex scale factor.
    pub fn dist_up_to_scale(&self, other: &Self) -> T {
        scale_distance(&self.entries(), &other.entries())
    }
}

impl<T: Real> Mul for Mat2<T> {
    type Output = Self;
    fn mul(self, r: Self) -> Self {
        let (a, b) = (&self.m, &r.m);
        Self::new(
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        )
    }
}

impl<T: Real> Add for Mat2<T> {
    type Output = Self;
    fn add(self, r: Self) -> Self {
        let (a, b) = (&self.m, &r.m);
        Self::new(a[0][0] + b[0][0], a[0][1] + b[0][1], a[1][0] + b[1][0], a[1][1] + b[1][1])
    }
}

impl<T: Real> Sub for Mat2<T> {
    type Output = Self;
    fn sub(self, r: Self) -> Self {
        self + r.scale(cr(-T::one()))
    }
}

/// `sqrt(2 − 2|⟨a,b⟩|/(‖a‖‖b‖))`, zero iff the vectors are parallel.
pub fn scale_distance<T: Real>(a: &[C<T>], b: &[C<T>]) -> T {
    let na = a.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
    let nb = b.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
    if na == T::zero() || nb == T::zero() {
        return if na == nb { T::zero() } else { T::SQRT_2() };
    }
    let ip: C<T> = a.iter().zip(b).map(|(x, y)| x.conj() * *y).fold(cr(T::zero()), |s, z| s + z);
    if ip.norm() == T::zero() {
        return T::SQRT_2();
    }
    // equals sqrt(2 − 2|⟨â,b̂⟩|) but evaluated as a residual norm
    let phase = ip.conj() / cr(ip.norm());
    a.iter().zip(b).map(|(x, y)| (*x / cr(na) - *y * phase / cr(nb)).norm_sqr()).sum::<T>().sqrt()
}

pub fn pauli_x<T: Real>() -> Mat2<T> {
    Mat2::from_real(T::zero(), T::one(), T::one(), T::zero())
}

pub fn pauli_y<T: Real>() -> Mat2<T> {
    Mat2::new(cr(T::zero()), c(T::zero(), -T::one()), c(T::zero(), T::one()), cr(T::zero()))
}

pub fn pauli_z<T: Real>() -> Mat2<T> {
    Mat2::from_real(T::one(), T::zero(), T::zero(), -T::one())
}

pub fn hadamard<T: Real>() -> Mat2<T> {
    let h = T::FRAC_1_SQRT_2();
    Mat2::from_real(h, h, h, -h)
}

/// `diag(e^{-iξ/2}, e^{iξ/2})` for complex ξ.
pub fn rz<T: Real>(xi: C<T>) -> Mat2<T> {
    let half = xi * cr(T::lit(0.5));
    let i = c(T::zero(), T::one());
    Mat2::diag((-i * half).exp(), (i * half).exp())
}

pub fn rz_re<T: Real>(xi: T) -> Mat2<T> {
    rz(cr(xi))
}

/// `H·Rz(ξ)·H`.
pub fn rx<T: Real>(xi: C<T>) -> Mat2<T> {
    let h = hadamard();
    h * rz(xi) * h
}

pub fn rx_re<T: Real>(xi: T) -> Mat2<T> {
    rx(cr(xi))
}

/// `diag(cos θ, sin θ)`.
pub fn d_theta<T: Real>(theta: T) -> Mat2<T> {
    Mat2::from_real(theta.cos(), T::zero(), T::zero(), theta.sin())
}

/// Single-qubit Pauli label.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];
    pub const NONTRIVIAL: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];

    pub fn matrix<T: Real>(self) -> Mat2<T> {
        match self {
            Pauli::I => Mat2::identity(),
            Pauli::X => pauli_x(),
            Pauli::Y => pauli_y(),
            Pauli::Z => pauli_z(),
        }
    }
}

/// Gate catalogue.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Gate<T> {
    X,
    Z,
    H,
    Rz(C<T>),
    Rx(C<T>),
    Cz,
    Cp(T),
}

#[derive(Clone, Debug, PartialEq)]
pub enum GateMatrix<T> {
    One(Mat2<T>),
    Two(DMat<T>),
}

pub fn gate_matrix<T: Real>(g: Gate<T>) -> GateMatrix<T> {
    match g {
        Gate::X => GateMatrix::One(pauli_x()),
        Gate::Z => GateMatrix::One(pauli_z()),
        Gate::H => GateMatrix::One(hadamard()),
        Gate::Rz(xi) => GateMatrix::One(rz(xi)),
        Gate::Rx(xi) => GateMatrix::One(rx(xi)),
        Gate::Cz => GateMatrix::Two(DMat::diag(&[cr(T::one()), cr(T::one()), cr(T::one()), cr(-T::one())])),
        Gate::Cp(phi) => {
            // exact −1 at φ = π so that CP(π) == CZ bit for bit
            let last = if phi == T::PI() { cr(-T::one()) } else { cis(phi) };
            GateMatrix::Two(DMat::diag(&[cr(T::one()), cr(T::one()), cr(T::one()), last]))
        }
    }
}

/// Dense complex matrix, row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real + Serialize + for<'a> Deserialize<'a>")]
pub struct DMat<T> {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<C<T>>,
}

impl<T: Real> DMat<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![cr(T::zero()); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = cr(T::one());
        }
        m
    }

    pub fn diag(d: &[C<T>]) -> Self {
        let n = d.len();
        let mut m = Self::zeros(n, n);
        for (i, z) in d.iter().enumerate() {
            m.data[i * n + i] = *z;
        }
        m
    }

    pub fn from_mat2(a: &Mat2<T>) -> Self {
        Self { rows: 2, cols: 2, data: a.entries().to_vec() }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C<T> {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, z: C<T>) {
        self.data[i * self.cols + j] = z;
    }

    pub fn matmul(&self, b: &Self) -> Self {
        assert_eq!(self.cols, b.rows, "shape mismatch");
        let mut out = Self::zeros(self.rows, b.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.re == T::zero() && a.im == T::zero() {
                    continue;
                }
                for j in 0..b.cols {
                    out.data[i * b.cols + j] = out.data[i * b.cols + j] + a * b.get(k, j);
                }
            }
        }
        out
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j).conj());
            }
        }
        out
    }

    pub fn trace(&self) -> C<T> {
        (0..self.rows.min(self.cols)).fold(cr(T::zero()), |s, i| s + self.get(i, i))
    }

    pub fn scale(&self, s: C<T>) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| *z * s).collect() }
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data.iter().zip(&other.data).map(|(a, b)| (*a - *b).norm()).fold(T::zero(), T::max)
    }

    pub fn dist_up_to_scale(&self, other: &Self) -> T {
        scale_distance(&self.data, &other.data)
    }

    pub fn to_mat2(&self) -> Option<Mat2<T>> {
        (self.rows == 2 && self.cols == 2).then(|| Mat2::new(self.data[0], self.data[1], self.data[2], self.data[3]))
    }

    pub fn to_nalgebra(&self) -> DMatrix<Complex<f64>> {
        DMatrix::from_fn(self.rows, self.cols, |i, j| to_c64(self.get(i, j)))
    }

    /// Eigenvalues of a Hermitian matrix in ascending order.
    pub fn eigvalsh(&self) -> Vec<T> {
        let m = self.to_nalgebra();
        let h = (&m + m.adjoint()) * Complex::new(0.5, 0.0);
        let mut ev: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(|a, b| a.total_cmp(b));
        ev.into_iter().map(T::lit).collect()
    }

    /// Singular values in descending order.
    pub fn singular_values(&self) -> Vec<T> {
        let sv = self.to_nalgebra().singular_values();
        let mut v: Vec<f64> = sv.iter().copied().collect();
        v.sort_by(|a, b| b.total_cmp(a));
        v.into_iter().map(T::lit).collect()
    }

    pub fn from_nalgebra(m: &DMatrix<Complex<f64>>) -> Self {
        let mut out = Self::zeros(m.nrows(), m.ncols());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                out.set(i, j, from_c64(m[(i, j)]));
            }
        }
        out
    }
}

/// Kronecker product `a ⊗ b`.
pub fn kron<T: Real>(a: &DMat<T>, b: &DMat<T>) -> DMat<T> {
    let mut out = DMat::zeros(a.rows * b.rows, a.cols * b.cols);
    for i in 0..a.rows {
        for j in 0..a.cols {
            let x = a.get(i, j);
            for k in 0..b.rows {
                for l in 0..b.cols {
                    out.set(i * b.rows + k, j * b.cols + l, x * b.get(k, l));
                }
            }
        }
    }
    out
}

pub fn kron2<T: Real>(a: &Mat2<T>, b: &Mat2<T>) -> DMat<T> {
    kron(&DMat::from_mat2(a), &DMat::from_mat2(b))
}

/// `m = u · κ·diag(cos θ, sin θ) · v` with `u`, `v` unitary.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real + Serialize + for<'a> Deserialize<'a>")]
pub struct Svd2<T> {
    pub u: Mat2<T>,
    pub theta: T,
    pub kappa: T,
    pub v: Mat2<T>,
}

impl<T: Real> Svd2<T> {
    pub fn d(&self) -> Mat2<T> {
        d_theta(self.theta).scale(cr(self.kappa))
    }

    pub fn reconstruct(&self) -> Mat2<T> {
        self.u * self.d() * self.v
    }

    pub fn singular_values(&self) -> (T, T) {
        (self.kappa * self.theta.cos(), self.kappa * self.theta.sin())
    }
}

fn normalize2<T: Real>(v: [C<T>; 2]) -> [C<T>; 2] {
    let n = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
    [v[0] / cr(n), v[1] / cr(n)]
}

/// Closed-form 2×2 SVD via the Hermitian eigenproblem of `m†m`.
pub fn svd2<T: Real>(m: &Mat2<T>) -> Result<Svd2<T>> {
    let tol = T::lit(1e-12).max(T::epsilon() * T::lit(16.0));
    if !m.is_invertible(tol) {
        return Err(Error::SingularInput);
    }
    let a = m.adjoint() * *m;
    let p = a.m[0][0].re;
    let r = a.m[1][1].re;
    let q = a.m[0][1];
    let half = T::lit(0.5);
    let disc = ((p - r) * half).hypot(q.norm());
    let lam = (p + r) * half + disc;
    let s1 = lam.sqrt();
    let s2 = m.det().norm() / s1;

    let cand_a = [q, cr(lam - p)];
    let cand_b = [cr(lam - r), q.conj()];
    let na = cand_a[0].norm_sqr() + cand_a[1].norm_sqr();
    let nb = cand_b[0].norm_sqr() + cand_b[1].norm_sqr();
    let v1 = if na.max(nb) <= T::epsilon() * (p + r) * (p + r) {
        [cr(T::one()), cr(T::zero())]
    } else if na >= nb {
        normalize2(cand_a)
    } else {
        normalize2(cand_b)
    };
    let v2 = [-v1[1].conj(), v1[0].conj()];

    let mv1 = m.apply(v1);
    let u1 = [mv1[0] / cr(s1), mv1[1] / cr(s1)];
    let u1 = normalize2(u1);
    let u2c = [-u1[1].conj(), u1[0].conj()];
    let mv2 = m.apply(v2);
    let ph = u2c[0].conj() * mv2[0] + u2c[1].conj() * mv2[1];
    let phase = if ph.norm() > T::zero() { ph / cr(ph.norm()) } else { cr(T::one()) };
    let u2 = [u2c[0] * phase, u2c[1] * phase];

    let u = Mat2::from_cols(u1, u2);
    let vmat = Mat2::from_cols(v1, v2).adjoint();
    let kappa = s1.hypot(s2);
    let theta = s2.atan2(s1);
    Ok(Svd2 { u, theta, kappa, v: vmat })
}

/// Column vectors |0⟩, |1⟩, |+⟩, |−⟩.
pub fn ket0<T: Real>() -> [C<T>; 2] {
    [cr(T::one()), cr(T::zero())]
}

pub fn ket1<T: Real>() -> [C<T>; 2] {
    [cr(T::zero()), cr(T::one())]
}

pub fn ket_plus<T: Real>() -> [C<T>; 2] {
    let h = cr(T::FRAC_1_SQRT_2());
    [h, h]
}

pub fn ket_minus<T: Real>() -> [C<T>; 2] {
    let h = T::FRAC_1_SQRT_2();
    [cr(h), cr(-h)]
}

/// Haar-random element of U(2), from a uniformly distributed unit
/// quaternion and a uniform global phase.
pub fn random_unitary<T: Real, R: rand::Rng + ?Sized>(rng: &mut R) -> Mat2<T> {
    let (u1, u2, u3, u4): (f64, f64, f64, f64) = (rng.random(), rng.random(), rng.random(), rng.random());
    let tau = std::f64::consts::TAU;
    let (r1, r2) = ((1.0 - u1).sqrt(), u1.sqrt());
    let a = Complex::new(r1 * (tau * u2).cos(), r1 * (tau * u2).sin());
    let b = Complex::new(r2 * (tau * u3).cos(), r2 * (tau * u3).sin());
    let ph = Complex::from_polar(1.0, tau * u4);
    let m = [[a * ph, -b.conj() * ph], [b * ph, a.conj() * ph]];
    Mat2 { m: [[from_c64(m[0][0]), from_c64(m[0][1])], [from_c64(m[1][0]), from_c64(m[1][1])]] }
}

/// Imaginary unit.
pub fn im<T: Real>() -> C<T> {
    cf(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn hadamard_is_x_plus_z() {
        let s = cr(std::f64::consts::FRAC_1_SQRT_2);
        let want = (pauli_x::<f64>() + pauli_z()).scale(s);
        assert!(hadamard::<f64>().max_abs_diff(&want) < 1e-15);
    }

    #[test]
    fn rz_pi_is_z_up_to_phase() {
        assert!(rz_re(PI).dist_up_to_scale(&pauli_z()) < 1e-15);
    }

    #[test]
    fn imaginary_rz_is_diagonal_stretch() {
        let th = PI / 6.0;
        let cot = 1.0 / th.tan();
        let g = rz(c(0.0, cot.ln()));
        let want = Mat2::diag(cr(cot.sqrt()), cr(1.0 / cot.sqrt()));
        assert!(g.max_abs_diff(&want) < 1e-14);
    }

    #[test]
    fn xh_equals_hz() {
        let h = hadamard::<f64>();
        assert!((pauli_x() * h).max_abs_diff(&(h * pauli_z())) < 1e-15);
    }

    #[test]
    fn cp_pi_is_cz_exactly() {
        assert_eq!(gate_matrix::<f64>(Gate::Cp(PI)), gate_matrix(Gate::Cz));
    }

    #[test]
    fn kron_examples() {
        let i4 = kron2(&Mat2::<f64>::identity(), &Mat2::identity());
        assert_eq!(i4, DMat::identity(4));
        let zz = kron2(&pauli_z::<f64>(), &pauli_z());
        assert_eq!(zz.get(3, 3), cr(1.0));
        let hh = kron2(&hadamard::<f64>(), &hadamard());
        assert!(hh.matmul(&hh).max_abs_diff(&DMat::identity(4)) < 1e-15);
    }

    #[test]
    fn svd_identity() {
        let s = svd2(&Mat2::<f64>::identity()).unwrap();
        assert!((s.theta - PI / 4.0).abs() < 1e-15);
        assert!((s.kappa - 2f64.sqrt()).abs() < 1e-15);
        assert!(s.reconstruct().max_abs_diff(&Mat2::identity()) < 1e-14);
    }

    #[test]
    fn svd_diag_2_1() {
        let m = Mat2::from_real(2.0, 0.0, 0.0, 1.0);
        let s = svd2(&m).unwrap();
        assert!((s.theta - 0.5f64.atan()).abs() < 1e-15);
        assert!((s.kappa - 5f64.sqrt()).abs() < 1e-14);
        assert!(s.u.m[0][1].norm() < 1e-15 && s.v.m[1][0].norm() < 1e-15);
        assert!(s.reconstruct().max_abs_diff(&m) < 1e-14);
    }

    #[test]
    fn svd_rejects_singular() {
        let m = Mat2::from_real(1.0, 2.0, 2.0, 4.0);
        assert_eq!(svd2(&m), Err(Error::SingularInput));
    }

    #[test]
    fn svd_f32() {
        let m = Mat2::<f32>::new(c(0.3, 1.0), c(-0.2, 0.1), c(0.7, 0.0), c(0.0, -0.4));
        let s = svd2(&m).unwrap();
        assert!(s.reconstruct().max_abs_diff(&m) < 1e-5);
    }

    #[test]
    fn scale_distance_ignores_phase() {
        let a = hadamard::<f64>();
        assert!(a.dist_up_to_scale(&a.scale(c(0.0, -3.0))) < 1e-15);
        assert!((a.dist_up_to_scale(&Mat2::zero()) - 2f64.sqrt()).abs() < 1e-15);
    }
}
