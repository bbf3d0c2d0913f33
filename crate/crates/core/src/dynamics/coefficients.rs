//! Transverse coefficients D, W, theta extracted from the monodromy
//! matrix, their closed forms on the quadratic saddle, and the
//! multiple-passing generalization.

use nalgebra::DMatrix;

use crate::critical::SaddleFrame;
use crate::error::{Error, Result};
use crate::scalar::Real;

use super::monodromy::MonodromyMatrix;
use super::orbit::SaddleOrbitSpec;

/// Coefficients of the quadratic transverse expansion of the action.
#[derive(Debug, Clone)]
pub struct TransverseCoefficients<T> {
    /// `D = |det(m12^-1)|`.
    pub d_coeff: T,
    /// Symmetric transverse phase matrix (scalar in two dimensions).
    pub w: DMatrix<T>,
    /// Instability exponent per period.
    pub theta: T,
    /// Lyapunov rate `theta / period`.
    pub lyapunov: T,
    /// `sqrt(2 m |sigma|)` of the unstable direction; the natural
    /// momentum/length scale of W and D (set when known).
    pub prefactor: Option<T>,
}

impl<T: Real> TransverseCoefficients<T> {
    /// W as a scalar; panics if the transverse space is not 1D.
    pub fn w_scalar(&self) -> T {
        assert_eq!(self.w.nrows(), 1);
        self.w[(0, 0)]
    }
}

const W_ASYMMETRY_TOL: f64 = 1e-8;

/// Extract D, W and the instability exponent from an integrated
/// monodromy matrix. W is symmetrized after asserting that the
/// numerical asymmetry is below tolerance.
pub fn coefficients_from_monodromy<T: Real>(
    m: &MonodromyMatrix<T>,
) -> Result<TransverseCoefficients<T>> {
    let k = m.m12.nrows();
    let m12_inv = m
        .m12
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Singular("m12 block not invertible".into()))?;
    let m12_t_inv = m
        .m12
        .transpose()
        .try_inverse()
        .ok_or_else(|| Error::Singular("m12^T block not invertible".into()))?;
    let d_coeff = m12_inv.clone().lu().determinant().abs();
    if d_coeff <= T::zero() {
        return Err(Error::NotASaddle(
            "vanishing D: transverse dynamics not hyperbolic".into(),
        ));
    }
    let w_raw = &m12_inv * &m.m11 + (&m.m22 - DMatrix::identity(k, k)) * &m12_inv - m12_t_inv;
    let asym = (&w_raw - w_raw.transpose()).norm();
    if asym > T::of(W_ASYMMETRY_TOL) * (T::one() + w_raw.norm()) {
        return Err(Error::Numeric(format!(
            "W asymmetry {:e} above tolerance",
            asym.as_f64()
        )));
    }
    let w = (&w_raw + w_raw.transpose()) * T::of(0.5);
    // instability exponent: log of the spectral radius of the return map
    let theta = m
        .full()
        .complex_eigenvalues()
        .iter()
        .map(|l| (l.re * l.re + l.im * l.im).sqrt().ln())
        .fold(T::zero(), |a, b| if b > a { b } else { a });
    let prefactor = if k == 1 {
        let ratio = m.m21[(0, 0)] / m.m12[(0, 0)];
        (ratio > T::zero()).then(|| ratio.sqrt())
    } else {
        None
    };
    Ok(TransverseCoefficients {
        d_coeff,
        w,
        theta,
        lyapunov: theta / m.period,
        prefactor,
    })
}

/// Closed-form coefficients for the quadratic 2D saddle:
/// `theta = 2 pi sqrt(m_s |sigma_u| / (m_u sigma_s))`,
/// `D = sqrt(2 m_u |sigma_u|) / sinh(theta)`,
/// `W = 2 sqrt(2 m_u |sigma_u|) tanh(theta / 2)`.
pub fn analytic_saddle_coefficients<T: Real>(
    frame: &SaddleFrame<T>,
    stable_axis: usize,
    unstable_axis: usize,
) -> Result<TransverseCoefficients<T>> {
    let sig_s = frame.sigmas[stable_axis];
    let sig_u = frame.sigmas[unstable_axis];
    if sig_s <= T::zero() || sig_u >= T::zero() {
        return Err(Error::NotASaddle(format!(
            "need sigma[{stable_axis}] > 0 and sigma[{unstable_axis}] < 0"
        )));
    }
    let m_s = frame.masses[stable_axis];
    let m_u = frame.masses[unstable_axis];
    let theta = T::two_pi() * (m_s * sig_u.abs() / (m_u * sig_s)).sqrt();
    let pref = (T::of(2.0) * m_u * sig_u.abs()).sqrt();
    let d_coeff = pref / theta.sinh();
    let w = T::of(2.0) * pref * (theta * T::of(0.5)).tanh();
    let period = T::two_pi() / frame.omega(stable_axis)?;
    Ok(TransverseCoefficients {
        d_coeff,
        w: DMatrix::from_element(1, 1, w),
        theta,
        lyapunov: theta / period,
        prefactor: Some(pref),
    })
}

/// The W coefficient of the zero-length orbit through the fixed point:
/// `W0 = 2 sqrt(2 m |sigma|)` (the `sigma_stable -> 0` limit of W).
pub fn w_zero<T: Real>(frame: &SaddleFrame<T>, unstable_axis: usize) -> Result<T> {
    let sig = frame.sigmas[unstable_axis];
    if sig >= T::zero() {
        return Err(Error::NotASaddle(format!("axis {unstable_axis} is not unstable")));
    }
    Ok(T::of(2.0) * (T::of(2.0) * frame.masses[unstable_axis] * sig.abs()).sqrt())
}

/// n-passing coefficients from the n-th power of the one-period
/// monodromy matrix.
pub fn multi_pass_coefficients<T: Real>(
    coeffs: &TransverseCoefficients<T>,
    n: usize,
) -> Result<(T, T)> {
    if n == 0 {
        return Err(Error::Parameter("passing count n must be >= 1".into()));
    }
    let pref = coeffs.prefactor.ok_or_else(|| {
        Error::Parameter("multi-pass coefficients need a scalar transverse direction".into())
    })?;
    let th = coeffs.theta;
    // one-period hyperbolic monodromy in the (x_perp, p_perp) plane
    let m1 = DMatrix::from_row_slice(
        2,
        2,
        &[th.cosh(), th.sinh() / pref, pref * th.sinh(), th.cosh()],
    );
    let mut m = DMatrix::identity(2, 2);
    for _ in 0..n {
        m = &m * &m1;
    }
    let m12 = m[(0, 1)];
    if m12 == T::zero() {
        return Err(Error::Singular("m12 of the n-pass monodromy vanishes".into()));
    }
    let d_n = (T::one() / m12).abs();
    let w_n = (m[(0, 0)] + m[(1, 1)] - T::of(2.0)) / m12;
    Ok((d_n, w_n))
}

/// Primitive-orbit action at energy `E` above the saddle:
/// `S = 2 pi (E - V_saddle) / omega1`.
pub fn action_of_orbit<T: Real>(spec: &SaddleOrbitSpec<T>, energy: T) -> Result<T> {
    let de = energy - spec.frame.v_saddle;
    if de < T::zero() {
        return Err(Error::Parameter(
            "orbit energy below the saddle value".into(),
        ));
    }
    let omega = spec.frame.omega(spec.stable_axis)?;
    Ok(T::two_pi() * de / omega)
}
