//! Measurement-based quantum computation on cluster states transformed by
//! invertible local operators.
//!
//! Every numerical kernel is generic over [`Real`]; the `*F64` aliases
//! below fix the common double-precision instantiation.

pub mod error;
pub mod mps;
pub mod percolation;
pub mod protocol;
pub mod qmath;
pub mod scalar;
pub mod slocc;
pub mod statevec;
pub mod verify;
pub mod walk;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Mat2F64 = qmath::Mat2<f64>;
pub type Mat2F32 = qmath::Mat2<f32>;
pub type Svd2F64 = qmath::Svd2<f64>;
pub type SloccOpF64 = slocc::SloccOp<f64>;
pub type PureStateF64 = statevec::PureState<f64>;
pub type PureStateF32 = statevec::PureState<f32>;
pub type LatticeSpecF64 = statevec::LatticeSpec<f64>;
pub type MeasurementBasisF64 = statevec::MeasurementBasis<f64>;
pub type MpsChainF64 = mps::MpsChain<f64>;
