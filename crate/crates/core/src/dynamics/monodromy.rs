//! Transverse monodromy matrix by integration of the variational
//! equations along a closed stable-manifold orbit.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::potential::PotentialField;
use crate::scalar::Real;

use super::orbit::{yoshida_weights, IntegratorOrder, SaddleOrbitSpec};

pub const CLOSURE_TOL: f64 = 1e-8;

/// Linearized transverse return map over one period,
/// `(x_perp(0), p_perp(0)) -> (x_perp(tau1), p_perp(tau1))`.
#[derive(Debug, Clone)]
pub struct MonodromyMatrix<T> {
    pub m11: DMatrix<T>,
    pub m12: DMatrix<T>,
    pub m21: DMatrix<T>,
    pub m22: DMatrix<T>,
    pub period: T,
}

impl<T: Real> MonodromyMatrix<T> {
    /// Assembled 2k x 2k matrix with the block layout of the return map.
    pub fn full(&self) -> DMatrix<T> {
        let k = self.m11.nrows();
        let mut m = DMatrix::zeros(2 * k, 2 * k);
        m.view_mut((0, 0), (k, k)).copy_from(&self.m11);
        m.view_mut((0, k), (k, k)).copy_from(&self.m12);
        m.view_mut((k, 0), (k, k)).copy_from(&self.m21);
        m.view_mut((k, k), (k, k)).copy_from(&self.m22);
        m
    }

    /// `|| M^T J M - J ||` with the standard symplectic form.
    pub fn symplectic_defect(&self) -> T {
        let k = self.m11.nrows();
        let m = self.full();
        let mut j = DMatrix::zeros(2 * k, 2 * k);
        for i in 0..k {
            j[(i, k + i)] = T::one();
            j[(k + i, i)] = -T::one();
        }
        (m.transpose() * &j * &m - j).norm()
    }

    pub fn determinant(&self) -> T {
        self.full().lu().determinant()
    }
}

struct VariationalState<T> {
    q: DVector<T>,
    p: DVector<T>,
    /// k x 2k position rows of the fundamental matrix.
    x: DMatrix<T>,
    /// k x 2k momentum rows.
    pm: DMatrix<T>,
}

/// Combined leapfrog step of the orbit and the transverse fundamental
/// matrix. The transverse Hessian block is sampled at the orbit's
/// current position for each kick.
fn var_leapfrog<T: Real>(
    potential: &PotentialField<T>,
    masses: &DVector<T>,
    basis: &DMatrix<T>,
    inv_m_perp: &DMatrix<T>,
    st: &mut VariationalState<T>,
    dt: T,
) -> Result<()> {
    let half = dt * T::of(0.5);
    let (_, g, h) = potential.evaluate_with_derivatives(&st.q)?;
    let k = basis.transpose() * &h * basis;
    st.p -= g * half;
    st.pm -= &k * &st.x * half;
    for i in 0..st.q.len() {
        st.q[i] += st.p[i] / masses[i] * dt;
    }
    st.x += inv_m_perp * &st.pm * dt;
    let (_, g, h) = potential.evaluate_with_derivatives(&st.q)?;
    let k = basis.transpose() * &h * basis;
    st.p -= g * half;
    st.pm -= &k * &st.x * half;
    Ok(())
}

/// Integrate the variational equations over one period of the orbit and
/// return the transverse monodromy blocks.
pub fn integrate_monodromy<T: Real>(
    potential: &PotentialField<T>,
    spec: &SaddleOrbitSpec<T>,
    dt: T,
    order: IntegratorOrder,
) -> Result<MonodromyMatrix<T>> {
    if dt <= T::zero() {
        return Err(Error::Parameter("dt must be positive".into()));
    }
    let d = spec.frame.dimension();
    let k = d - 1;
    if k == 0 {
        return Err(Error::Parameter(
            "monodromy needs at least one transverse direction".into(),
        ));
    }
    // transverse basis: all principal axes except the longitudinal one
    let mut basis = DMatrix::zeros(d, k);
    let mut inv_m_perp = DMatrix::zeros(k, k);
    let mut col = 0;
    for a in 0..d {
        if a == spec.stable_axis {
            continue;
        }
        basis.set_column(col, &spec.frame.axes.column(a));
        inv_m_perp[(col, col)] = T::one() / spec.frame.masses[a];
        col += 1;
    }
    let s0 = spec.initial_state();
    let mut st = VariationalState {
        q: s0.q.clone(),
        p: s0.p.clone(),
        x: DMatrix::identity(k, 2 * k) * T::one(),
        pm: {
            let mut m = DMatrix::zeros(k, 2 * k);
            m.view_mut((0, k), (k, k)).copy_from(&DMatrix::identity(k, k));
            m
        },
    };
    let masses = spec.frame.masses.clone();
    let n_full = (spec.period / dt).floor().as_f64() as usize;
    let rem = spec.period - dt * T::of(n_full as f64);
    let advance = |st: &mut VariationalState<T>, h: T| -> Result<()> {
        match order {
            IntegratorOrder::Second => var_leapfrog(potential, &masses, &basis, &inv_m_perp, st, h),
            IntegratorOrder::Fourth => {
                for w in yoshida_weights::<T>() {
                    var_leapfrog(potential, &masses, &basis, &inv_m_perp, st, w * h)?;
                }
                Ok(())
            }
        }
    };
    for _ in 0..n_full {
        advance(&mut st, dt)?;
    }
    if rem > dt * T::of(1e-12) {
        advance(&mut st, rem)?;
    }
    // the orbit must close to tolerance, otherwise the period is wrong
    let scale = T::one() + s0.q.norm();
    let miss = ((&st.q - &s0.q).norm() + (&st.p - &s0.p).norm()) / scale;
    let tol = T::of(CLOSURE_TOL).max(T::default_epsilon().sqrt());
    if miss > tol {
        return Err(Error::Orbit(format!(
            "orbit not closed over the supplied period: miss {:e}",
            miss.as_f64()
        )));
    }
    Ok(MonodromyMatrix {
        m11: st.x.view((0, 0), (k, k)).clone_owned(),
        m12: st.x.view((0, k), (k, k)).clone_owned(),
        m21: st.pm.view((0, 0), (k, k)).clone_owned(),
        m22: st.pm.view((0, k), (k, k)).clone_owned(),
        period: spec.period,
    })
}
