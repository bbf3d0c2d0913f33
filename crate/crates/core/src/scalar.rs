//! Scalar abstraction: all core math is generic over the floating type.
//!
//! `Real` is the bound used by the classical / semiclassical modules,
//! `FftReal` adds what the spectral solvers need. Concrete aliases for
//! the common instantiations live at the crate root.

use num_traits::{FromPrimitive, ToPrimitive};

/// Real scalar for classical dynamics and semiclassical formulas.
pub trait Real: nalgebra::RealField + FromPrimitive + ToPrimitive + Copy {
    /// Lift an `f64` literal into the scalar type.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("literal not representable in scalar type")
    }

    /// Lossy readback, used for reporting and index arithmetic.
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar not convertible to f64")
    }
}

impl<T: nalgebra::RealField + FromPrimitive + ToPrimitive + Copy> Real for T {}

/// Real scalar usable in the FFT-based solvers.
pub trait FftReal: Real + rustfft::FftNum {}

impl<T: Real + rustfft::FftNum> FftReal for T {}
