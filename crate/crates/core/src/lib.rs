//! Zero-energy threshold resonances of curvature-induced potentials and the
//! point interactions they produce when a bent Dirichlet waveguide is
//! squeezed onto a line.
//!
//! The numerics are generic over the [`Real`] scalar (`f32` or `f64`); the
//! `*64` aliases below fix the common double-precision instantiations.

pub mod error;
pub mod geometry;
pub mod linalg;
pub mod ode;
pub mod pointint;
pub mod quadrature;
pub mod resonance;
pub mod roots;
pub mod scaled;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::{Real, Scalar};

pub use num_complex::Complex;

pub type CurvatureProfile64 = geometry::CurvatureProfile<f64>;
pub type ScalingFamily64 = geometry::ScalingFamily<f64>;
pub type Potential64 = geometry::Potential<f64>;
pub type ResonanceReport64 = resonance::ResonanceReport<f64>;
pub type Constants64 = resonance::Constants<f64>;
pub type PointInteraction64 = pointint::PointInteraction<f64>;
pub type Momentum64 = pointint::Momentum<f64>;
pub type ScatteringData64 = pointint::ScatteringData<f64>;
pub type BoundState64 = pointint::BoundState<f64>;
pub type ScaledResolvent64 = scaled::ScaledResolvent<f64>;
pub type ConvergenceRecord64 = scaled::ConvergenceRecord<f64>;
