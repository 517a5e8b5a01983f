//! Scalar abstraction shared by every numerical routine.

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use std::fmt::{Debug, Display};
use std::iter::Sum;

/// Real floating-point type usable as the scalar of all kernels.
///
/// Implemented for `f32` and `f64`. Heavy linear algebra (Hermitian
/// eigenproblems, general SVD) is delegated to `nalgebra` in `f64` and
/// converted back.
pub trait Real: Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Sum + Send + Sync + 'static {
    /// Default tolerance for algebraic identities at this precision.
    fn tol() -> Self;

    /// Converts an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable")
    }

    #[inline]
    fn f64(self) -> f64 {
        self.to_f64().expect("finite conversion")
    }
}

impl Real for f32 {
    fn tol() -> Self {
        1e-5
    }
}

impl Real for f64 {
    fn tol() -> Self {
        1e-12
    }
}

pub type C<T> = Complex<T>;

#[inline]
pub fn c<T: Real>(re: T, im: T) -> C<T> {
    Complex::new(re, im)
}

#[inline]
pub fn cr<T: Real>(re: T) -> C<T> {
    Complex::new(re, T::zero())
}

#[inline]
pub fn cf<T: Real>(re: f64, im: f64) -> C<T> {
    Complex::new(T::lit(re), T::lit(im))
}

/// `e^{iφ}` for real φ.
#[inline]
pub fn cis<T: Real>(phi: T) -> C<T> {
    Complex::new(phi.cos(), phi.sin())
}

#[inline]
pub fn to_c64<T: Real>(z: C<T>) -> Complex<f64> {
    Complex::new(z.re.f64(), z.im.f64())
}

#[inline]
pub fn from_c64<T: Real>(z: Complex<f64>) -> C<T> {
    Complex::new(T::lit(z.re), T::lit(z.im))
}
