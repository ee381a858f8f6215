//! Rotation of rigid spheres in a periodic suspension driven by a constant
//! strain: stresslet kernels, renormalized lattice sums, the periodic
//! mobility field, an orientation simulator and transport metrics.
//!
//! All numerics are generic over [`Scalar`] (`f32`/`f64`); the aliases below
//! fix `f64`.

// Index loops mirror the component formulas; negated comparisons reject NaN.
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord, clippy::assign_op_pattern)]

pub mod error;
pub mod geometry;
pub mod kernels;
pub mod lattice_sums;
pub mod linalg;
pub mod mobility;
pub mod quadrature;
pub mod scalar;
pub mod sim;
pub mod summation;
pub mod transport;

pub use error::{Error, Result};
pub use scalar::Scalar;
pub use summation::Reduction;

pub type Vector = linalg::Vec3<f64>;
pub type Matrix = linalg::Mat3<f64>;
pub type Strain = geometry::StrainMatrix<f64>;
pub type Torus = geometry::TorusGeometry<f64>;
pub type Lattice = geometry::LatticeSpec<f64>;
pub type Bounded = lattice_sums::BoundedValue<f64>;
pub type Constants = lattice_sums::LatticeConstant<f64>;
