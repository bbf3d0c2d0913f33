//! Semiclassical prediction of scarred eigenstates from the monodromy of
//! closed orbits on the stable manifold of potential saddle points, with
//! exact small-scale quantum solvers (periodic 1D plane-wave basis, 2D
//! grid eigensolver, split-step wave-packet propagation) to compare
//! against.
//!
//! All numerical kernels are generic over the scalar type through the
//! [`scalar::Real`] trait (any `nalgebra::RealField` + `num_traits`
//! conversions, i.e. `f32` or `f64`); concrete `f64` aliases are exported
//! at the crate root.

pub mod analysis;
pub mod config;
pub mod critical;
pub mod dynamics;
pub mod error;
pub mod potential;
pub mod quantum;
pub mod report;
pub mod scalar;
pub mod scar;

pub use error::{Error, Result};
pub use scalar::{FftReal, Real};

/// Default relative step for finite-difference derivatives.
pub const DEFAULT_FD_STEP: f64 = 1e-5;

/// Default relative energy-drift tolerance of the orbit integrators.
pub const DEFAULT_ENERGY_DRIFT_TOL: f64 = 1e-6;

/// Concrete `f64` aliases for the main data types.
pub type PotentialField64 = potential::PotentialField<f64>;
pub type CriticalPoint64 = critical::CriticalPoint<f64>;
pub type SaddleFrame64 = critical::SaddleFrame<f64>;
pub type MonodromyMatrix64 = dynamics::MonodromyMatrix<f64>;
pub type TransverseCoefficients64 = dynamics::TransverseCoefficients<f64>;
pub type ScarDensityModel64 = scar::ScarDensityModel<f64>;
pub type Spectrum1D64 = quantum::Spectrum1D<f64>;
pub type Spectrum2D64 = quantum::Spectrum2D<f64>;
