//! Classification and canonical decomposition of invertible local
//! operators, plus the closed forms of the two teleportation strategies.

use crate::error::{Error, Result};
use crate::qmath::{d_theta, hadamard, pauli_x, rz, rz_re, svd2, Mat2, Svd2};
use crate::scalar::{c, cr, Real, C};
use serde::{Deserialize, Serialize};

/// Default classification tolerance on the Frobenius-normalised operator.
pub const CLASSIFY_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassFlags {
    pub is_n_type: bool,
    pub is_b_type: bool,
    pub is_unitary: bool,
}

/// An invertible single-qubit operator with its cached decomposition.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real + Serialize + for<'a> Deserialize<'a>")]
pub struct SloccOp<T> {
    pub matrix: Mat2<T>,
    pub svd: Svd2<T>,
    pub theta: T,
    pub flags: ClassFlags,
}

impl<T: Real> SloccOp<T> {
    /// `S†S / ‖S‖²_F`, unit trace.
    pub fn metric(&self) -> Mat2<T> {
        normalized_metric(&self.matrix)
    }

    /// Ratio of singular values σ₂/σ₁ = tan θ.
    pub fn lambda(&self) -> T {
        self.theta.tan()
    }
}

fn normalized_metric<T: Real>(s: &Mat2<T>) -> Mat2<T> {
    let n = s.frob_norm();
    let sn = s.scale(cr(T::one() / n));
    sn.adjoint() * sn
}

pub fn classify<T: Real>(s: &Mat2<T>) -> Result<SloccOp<T>> {
    classify_with_tol(s, T::lit(CLASSIFY_TOL))
}

pub fn classify_with_tol<T: Real>(s: &Mat2<T>, tol: T) -> Result<SloccOp<T>> {
    let svd = svd2(s)?;
    let t = normalized_metric(s);
    let diag_gap = (t.m[0][0].re - t.m[1][1].re).abs();
    let off = t.m[0][1].norm();
    let cos2theta = diag_gap.hypot(off + off);
    let flags = ClassFlags { is_n_type: diag_gap < tol, is_b_type: off < tol, is_unitary: cos2theta < tol };
    Ok(SloccOp { matrix: *s, svd, theta: svd.theta, flags })
}

/// `S ∝ u · D(θ) · H · Rz(γ)` with `u` unitary.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real + Serialize + for<'a> Deserialize<'a>")]
pub struct NTypeCanon<T> {
    pub u: Mat2<T>,
    pub theta: T,
    pub gamma: T,
}

impl<T: Real> NTypeCanon<T> {
    pub fn from_params(u: Mat2<T>, theta: T, gamma: T) -> Self {
        Self { u, theta, gamma }
    }

    pub fn matrix(&self) -> Mat2<T> {
        self.u * d_theta(self.theta) * hadamard() * rz_re(self.gamma)
    }
}

/// Canonical N-type form. θ is returned in (0, π/4]; a θ > π/4 input is
/// absorbed into `u` and a shift of γ by π.
pub fn n_canon<T: Real>(op: &SloccOp<T>) -> Result<NTypeCanon<T>> {
    if !op.flags.is_n_type {
        return Err(Error::NotNType);
    }
    let theta = op.theta;
    let gamma = if op.flags.is_unitary {
        T::zero()
    } else {
        let g = op.metric().m[0][1].arg();
        if g < T::zero() {
            g + T::TAU()
        } else {
            g
        }
    };
    let kappa = op.matrix.frob_norm();
    let u = op.matrix * rz_re(-gamma) * hadamard() * d_theta(theta).inverse()?.scale(cr(T::one() / kappa));
    Ok(NTypeCanon { u, theta, gamma })
}

/// `S ∝ u · D(θ) ∝ u · Rz(i·ln cot θ)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real + Serialize + for<'a> Deserialize<'a>")]
pub struct BTypeCanon<T> {
    pub u: Mat2<T>,
    pub theta: T,
    pub eps_im: T,
}

impl<T: Real> BTypeCanon<T> {
    pub fn from_params(u: Mat2<T>, theta: T) -> Self {
        Self { u, theta, eps_im: (T::one() / theta.tan()).ln() }
    }

    pub fn matrix(&self) -> Mat2<T> {
        self.u * d_theta(self.theta)
    }

    /// The same operator written as `u · Rz(i·ε)` up to scale.
    pub fn as_imaginary_rz(&self) -> Mat2<T> {
        self.u * rz(c(T::zero(), self.eps_im))
    }

    pub fn lambda(&self) -> T {
        self.theta.tan()
    }
}

pub fn b_canon<T: Real>(op: &SloccOp<T>) -> Result<BTypeCanon<T>> {
    if !op.flags.is_b_type {
        return Err(Error::NotBType);
    }
    let t = op.metric();
    let theta = t.m[1][1].re.max(T::zero()).sqrt().atan2(t.m[0][0].re.max(T::zero()).sqrt());
    let kappa = op.matrix.frob_norm();
    let u = op.matrix * d_theta(theta).inverse()?.scale(cr(T::one() / kappa));
    Ok(BTypeCanon::from_params(u, theta))
}

/// Byproduct angle μ′ of a Strategy I measurement with outcome 1: the
/// teleported operator is `Rx(μ′)·H·Rz(ξ)`.
pub fn strategy1_byproduct_angle<T: Real>(theta: T, gamma: T, xi: T) -> T {
    let c2 = (theta + theta).cos();
    let d = gamma - xi;
    let two = T::lit(2.0);
    two * (T::one() - c2 * d.cos()).atan2(c2 * d.sin())
}

/// Outcome probabilities `p0 = (1 + cos2θ·cos2ξ)/2`, `p1 = 1 − p0`, as
/// stated in the closed form.
pub fn strategy1_probs<T: Real>(theta: T, xi: T) -> (T, T) {
    let p0 = (T::one() + (theta + theta).cos() * (xi + xi).cos()) * T::lit(0.5);
    (p0, T::one() - p0)
}

/// Born probabilities of the Strategy I outcomes for `N = u·D(θ)·H·Rz(γ)`
/// followed by an unmeasured or unitary-transformed neighbour.
pub fn strategy1_born_probs<T: Real>(theta: T, gamma: T, xi: T) -> (T, T) {
    let s2 = (theta + theta).sin();
    let c2 = (theta + theta).cos();
    let p0 = s2 * s2 / (T::lit(2.0) * (T::one() - c2 * (gamma - xi).cos()));
    (p0, T::one() - p0)
}

/// Mean of a 2π-periodic function by the trapezoidal rule, which converges
/// geometrically for analytic integrands.
pub fn periodic_mean<T: Real>(nodes: usize, f: impl Fn(T) -> T) -> T {
    let h = T::TAU() / T::from_usize(nodes).expect("node count");
    (0..nodes).map(|k| f(h * T::from_usize(k).expect("index"))).sum::<T>() / T::from_usize(nodes).expect("node count")
}

/// Teleported gate `X^m · H · Rz(β′ + i·ln cot θ)` of Strategy II.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real + Serialize + for<'a> Deserialize<'a>")]
pub struct Strategy2Gate<T> {
    pub angle: C<T>,
    pub x_byproduct: bool,
}

impl<T: Real> Strategy2Gate<T> {
    pub fn matrix(&self) -> Mat2<T> {
        let g = hadamard() * rz(self.angle);
        if self.x_byproduct {
            pauli_x() * g
        } else {
            g
        }
    }
}

pub fn strategy2_gate<T: Real>(theta: T, beta_prime: T, m: u8) -> Strategy2Gate<T> {
    Strategy2Gate { angle: c(beta_prime, (T::one() / theta.tan()).ln()), x_byproduct: m & 1 == 1 }
}

/// Closed-form reduced density matrix of qubit k in a cluster whose qubits
/// carry `D(θ)` operators; untouched qubits have θ = π/4.
pub fn lemma2_density<T: Real>(theta_k: T, neighbor_thetas: &[T]) -> Mat2<T> {
    let prod: T = neighbor_thetas.iter().map(|t| (*t + *t).cos()).fold(T::one(), |a, b| a * b);
    let off = T::lit(0.5) * (theta_k + theta_k).sin() * prod;
    let (ck, sk) = (theta_k.cos(), theta_k.sin());
    Mat2::from_real(ck * ck, off, off, sk * sk)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmath::pauli_x;
    use std::f64::consts::{FRAC_PI_4, PI};

    #[test]
    fn identity_is_everything() {
        let op = classify(&Mat2::<f64>::identity()).unwrap();
        assert_eq!(op.flags, ClassFlags { is_n_type: true, is_b_type: true, is_unitary: true });
    }

    #[test]
    fn diag_is_b_only() {
        let op = classify(&Mat2::from_real(2.0, 0.0, 0.0, 1.0)).unwrap();
        assert!(op.flags.is_b_type && !op.flags.is_n_type && !op.flags.is_unitary);
    }

    #[test]
    fn lemma1_form_is_n_only() {
        let s = d_theta::<f64>(PI / 6.0) * hadamard() * rz_re(0.7);
        let op = classify(&s).unwrap();
        assert!(op.flags.is_n_type && !op.flags.is_b_type);
    }

    #[test]
    fn n_canon_examples() {
        let s = d_theta::<f64>(0.3) * hadamard() * rz_re(1.1);
        let nc = n_canon(&classify(&s).unwrap()).unwrap();
        assert!((nc.theta - 0.3).abs() < 1e-12 && (nc.gamma - 1.1).abs() < 1e-12);
        assert!(nc.u.max_abs_diff(&Mat2::identity()) < 1e-12);

        let s = pauli_x() * d_theta::<f64>(0.4) * hadamard() * rz_re(2.0);
        let nc = n_canon(&classify(&s).unwrap()).unwrap();
        assert!((nc.theta - 0.4).abs() < 1e-12 && (nc.gamma - 2.0).abs() < 1e-12);
        assert!(nc.u.max_abs_diff(&pauli_x()) < 1e-12);

        let nc = n_canon(&classify(&hadamard::<f64>()).unwrap()).unwrap();
        assert!((nc.theta - FRAC_PI_4).abs() < 1e-12 && nc.gamma == 0.0);
        assert!(nc.matrix().dist_up_to_scale(&hadamard()) < 1e-12);
    }

    #[test]
    fn b_canon_examples() {
        let bc = b_canon(&classify(&d_theta::<f64>(0.5)).unwrap()).unwrap();
        assert!(bc.u.max_abs_diff(&Mat2::identity()) < 1e-12);
        assert!((bc.theta - 0.5).abs() < 1e-12);
        assert!((bc.eps_im - (1.0 / 0.5f64.tan()).ln()).abs() < 1e-12);

        let s = hadamard() * d_theta::<f64>(0.9);
        let bc = b_canon(&classify(&s).unwrap()).unwrap();
        assert!(bc.u.max_abs_diff(&hadamard()) < 1e-12);

        let bc = b_canon(&classify(&(d_theta::<f64>(0.3) * hadamard())).unwrap()).unwrap_err();
        assert_eq!(bc, Error::NotBType);
        let bc = b_canon(&classify(&rz_re(0.3f64)).unwrap()).unwrap();
        assert!(bc.eps_im.abs() < 1e-12);
    }

    #[test]
    fn wrong_class_errors() {
        let op = classify(&Mat2::from_real(2.0, 0.0, 0.0, 1.0)).unwrap();
        assert_eq!(n_canon(&op), Err(Error::NotNType));
    }

    #[test]
    fn byproduct_angle_unitary_limit() {
        for (g, x) in [(0.0, 0.0), (1.0, -2.0), (3.0, 0.5)] {
            assert!((strategy1_byproduct_angle(FRAC_PI_4, g, x) - PI).abs() < 1e-12);
        }
    }

    #[test]
    fn probs_examples() {
        assert_eq!(strategy1_probs(FRAC_PI_4, 0.3).0, 0.5);
        let (p0, _) = strategy1_probs(0.3, 0.0);
        assert!((p0 - 0.3f64.cos().powi(2)).abs() < 1e-15);
    }

    #[test]
    fn strategy2_examples() {
        let g = strategy2_gate(FRAC_PI_4, 0.7, 0);
        assert!(g.angle.im.abs() < 1e-15 && !g.x_byproduct);
        let g1 = strategy2_gate(0.4, 1.3, 1);
        assert!(g1.x_byproduct);
        assert_eq!(g1.angle, strategy2_gate(0.4, 1.3, 0).angle);
    }

    #[test]
    fn lemma2_untouched_neighbour_gives_maximally_mixed() {
        let r = lemma2_density(FRAC_PI_4, &[0.3, FRAC_PI_4]);
        assert!(r.max_abs_diff(&Mat2::from_real(0.5, 0.0, 0.0, 0.5)) < 1e-15);
    }
}
