//! Multiplier operators on the sphere `S^m`, band-limited positive definite
//! kernels, and numerical verifiers for the Fourier-sum identities,
//! inequalities and eigenvalue-decay rates they satisfy.
//!
//! All numerical code is generic over a [`Scalar`] (`f32` or `f64`); the
//! aliases at the crate root fix the scalar to `f64`, which is what the
//! verifiers and the `sphmult` command-line tool use.

pub mod analysis;
pub mod config;
pub mod error;
pub mod kernels;
pub mod multipliers;
pub mod quadrature;
pub mod runner;
pub mod scalar;
pub mod specialfns;
pub mod summation;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Gauss rule on `[-1, 1]` in double precision.
pub type Rule1D = quadrature::Rule<f64>;
/// Product quadrature grid on `S^2` in double precision.
pub type SphereGrid = quadrature::SphereGrid<f64>;
/// Per-degree table of spherical-harmonic coefficients.
pub type CoeffTable = kernels::CoeffTable<f64>;
pub type CoefficientKernel = kernels::CoefficientKernel<f64>;
pub type ZonalKernel = kernels::ZonalKernel<f64>;
pub type EigenvalueSequence = kernels::EigenvalueSequence<f64>;
pub type MultiplierFamily = multipliers::MultiplierFamily<f64>;
pub type HarmonicBasis = analysis::HarmonicBasis<f64>;
