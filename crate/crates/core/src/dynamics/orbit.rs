//! Fixed-step symplectic integration of Hamiltonian orbits.

use nalgebra::DVector;

use crate::critical::SaddleFrame;
use crate::error::{Error, Result};
use crate::potential::PotentialField;
use crate::scalar::Real;

/// Phase-space state along a trajectory.
#[derive(Debug, Clone)]
pub struct TrajectoryState<T> {
    pub q: DVector<T>,
    pub p: DVector<T>,
    pub t: T,
}

impl<T: Real> TrajectoryState<T> {
    pub fn energy(&self, potential: &PotentialField<T>, masses: &DVector<T>) -> Result<T> {
        let mut kin = T::zero();
        for i in 0..self.p.len() {
            kin += self.p[i] * self.p[i] / (T::of(2.0) * masses[i]);
        }
        Ok(kin + potential.value(&self.q)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IntegratorOrder {
    /// Kick-drift-kick leapfrog.
    Second,
    /// Yoshida triple-jump composition of leapfrog steps.
    Fourth,
}

#[derive(Debug, Clone)]
pub struct OrbitResult<T> {
    pub states: Vec<TrajectoryState<T>>,
    pub energy_drift: T,
    /// Set when the energy drift exceeded the requested tolerance.
    pub accuracy_warning: bool,
}

/// One leapfrog step of size `dt` (two force evaluations; the trailing
/// one could be shared with the next step but orbits here are short).
fn leapfrog_step<T: Real>(
    potential: &PotentialField<T>,
    masses: &DVector<T>,
    q: &mut DVector<T>,
    p: &mut DVector<T>,
    dt: T,
) -> Result<()> {
    let half = dt * T::of(0.5);
    let g = potential.gradient(q)?;
    if !g.iter().all(|v| v.is_finite()) {
        return Err(Error::Numeric("non-finite force".into()));
    }
    *p -= g * half;
    for i in 0..q.len() {
        q[i] += p[i] / masses[i] * dt;
    }
    let g = potential.gradient(q)?;
    if !g.iter().all(|v| v.is_finite()) {
        return Err(Error::Numeric("non-finite force".into()));
    }
    *p -= g * half;
    Ok(())
}

/// Yoshida 4th-order composition coefficients.
pub(crate) fn yoshida_weights<T: Real>() -> [T; 3] {
    let cbrt2 = T::of(2.0f64.powf(1.0 / 3.0));
    let w1 = T::one() / (T::of(2.0) - cbrt2);
    let w0 = T::one() - T::of(2.0) * w1;
    [w1, w0, w1]
}

pub(crate) fn step<T: Real>(
    potential: &PotentialField<T>,
    masses: &DVector<T>,
    q: &mut DVector<T>,
    p: &mut DVector<T>,
    dt: T,
    order: IntegratorOrder,
) -> Result<()> {
    match order {
        IntegratorOrder::Second => leapfrog_step(potential, masses, q, p, dt),
        IntegratorOrder::Fourth => {
            for w in yoshida_weights::<T>() {
                leapfrog_step(potential, masses, q, p, w * dt)?;
            }
            Ok(())
        }
    }
}

/// Integrate an orbit for total time `t_total` with fixed step `dt`,
/// returning the state at every step.
pub fn integrate_orbit<T: Real>(
    potential: &PotentialField<T>,
    s0: &TrajectoryState<T>,
    masses: &[T],
    t_total: T,
    dt: T,
    order: IntegratorOrder,
) -> Result<OrbitResult<T>> {
    if dt <= T::zero() || t_total < dt {
        return Err(Error::Parameter("need dt > 0 and t_total >= dt".into()));
    }
    let masses = DVector::from_row_slice(masses);
    let n_steps = (t_total / dt).round().as_f64() as usize;
    let mut q = s0.q.clone();
    let mut p = s0.p.clone();
    let e0 = s0.energy(potential, &masses)?;
    let mut states = Vec::with_capacity(n_steps + 1);
    states.push(s0.clone());
    let mut max_drift = T::zero();
    for k in 0..n_steps {
        step(potential, &masses, &mut q, &mut p, dt, order)?;
        let st = TrajectoryState {
            q: q.clone(),
            p: p.clone(),
            t: s0.t + dt * T::of((k + 1) as f64),
        };
        let drift = (st.energy(potential, &masses)? - e0).abs();
        if drift > max_drift {
            max_drift = drift;
        }
        states.push(st);
    }
    let tol = T::of(crate::DEFAULT_ENERGY_DRIFT_TOL) * (T::one() + e0.abs());
    Ok(OrbitResult {
        states,
        energy_drift: max_drift,
        accuracy_warning: max_drift > tol,
    })
}

/// A harmonic stable-manifold orbit of a saddle frame.
#[derive(Debug, Clone)]
pub struct SaddleOrbitSpec<T> {
    pub frame: SaddleFrame<T>,
    pub stable_axis: usize,
    pub amplitude: T,
    /// One period; `2 pi sqrt(m / (2 sigma))` for the quadratic frame.
    pub period: T,
}

impl<T: Real> SaddleOrbitSpec<T> {
    pub fn new(frame: SaddleFrame<T>, stable_axis: usize, amplitude: T) -> Result<Self> {
        let omega = frame.omega(stable_axis)?;
        let period = T::two_pi() / omega;
        Ok(SaddleOrbitSpec {
            frame,
            stable_axis,
            amplitude,
            period,
        })
    }

    /// Same orbit but with an explicitly supplied (e.g. shooting-refined)
    /// period.
    pub fn with_period(mut self, period: T) -> Self {
        self.period = period;
        self
    }

    /// Initial condition on the stable axis turning point.
    pub fn initial_state(&self) -> TrajectoryState<T> {
        let d = self.frame.dimension();
        let mut y = DVector::zeros(d);
        y[self.stable_axis] = self.amplitude;
        TrajectoryState {
            q: self.frame.to_ambient(&y),
            p: DVector::zeros(d),
            t: T::zero(),
        }
    }
}

/// Period of the closed orbit launched from the stable-axis turning point,
/// found by integrating to the second zero crossing of the longitudinal
/// momentum and refining the crossing by interpolation. Closure in phase
/// space is verified to `closure_tol`.
pub fn closed_orbit_period<T: Real>(
    potential: &PotentialField<T>,
    spec: &SaddleOrbitSpec<T>,
    dt: T,
    closure_tol: T,
) -> Result<T> {
    let masses = spec.frame.masses.clone();
    let axis = spec.frame.axes.column(spec.stable_axis).clone_owned();
    let s0 = spec.initial_state();
    let mut q = s0.q.clone();
    let mut p = s0.p.clone();
    let mut t = T::zero();
    let mut crossings = 0usize;
    let t_max = spec.period * T::of(3.0);
    let mut period = None;
    while t < t_max {
        let p1_before = axis.dot(&p);
        step(potential, &masses, &mut q, &mut p, dt, IntegratorOrder::Fourth)?;
        t += dt;
        let p1_after = axis.dot(&p);
        if p1_before != T::zero() && p1_before * p1_after <= T::zero() && p1_after != p1_before {
            crossings += 1;
            if crossings == 2 {
                // linear interpolation of the zero crossing
                let frac = p1_before / (p1_before - p1_after);
                period = Some(t - dt + frac * dt);
                break;
            }
        }
    }
    let period = period.ok_or_else(|| {
        Error::Orbit("no closed orbit found within three nominal periods".into())
    })?;
    // verify closure at the refined period
    let mut q = s0.q.clone();
    let mut p = s0.p.clone();
    let n_full = (period / dt).floor().as_f64() as usize;
    for _ in 0..n_full {
        step(potential, &masses, &mut q, &mut p, dt, IntegratorOrder::Fourth)?;
    }
    let rem = period - dt * T::of(n_full as f64);
    if rem > T::zero() {
        step(potential, &masses, &mut q, &mut p, rem, IntegratorOrder::Fourth)?;
    }
    let scale = T::one() + s0.q.norm();
    let miss = ((&q - &s0.q).norm() + (&p - &s0.p).norm()) / scale;
    if miss > closure_tol {
        return Err(Error::Orbit(format!(
            "orbit not closed: phase-space miss {:e} exceeds {:e}",
            miss.as_f64(),
            closure_tol.as_f64()
        )));
    }
    Ok(period)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::critical::find_critical_point;
    use approx::assert_relative_eq;

    fn dv(xs: &[f64]) -> DVector<f64> {
        DVector::from_row_slice(xs)
    }

    fn saddle_frame_2d(s1: f64, s2: f64) -> SaddleFrame<f64> {
        let p = PotentialField::quadratic_saddle(&[s1, s2]);
        let cp = find_critical_point(&p, &dv(&[0.0, 0.0]), 1e-12).unwrap();
        SaddleFrame::from_critical_point(&p, &cp, &[1.0, 1.0], 1.0).unwrap()
    }

    #[test]
    fn harmonic_orbit_returns_to_start() {
        let p = PotentialField::quadratic_saddle(&[1.0]);
        let tau = 2.0 * std::f64::consts::PI / 2.0f64.sqrt();
        let s0 = TrajectoryState {
            q: dv(&[1.0]),
            p: dv(&[0.0]),
            t: 0.0,
        };
        // step chosen to divide the period exactly
        let r =
            integrate_orbit(&p, &s0, &[1.0], tau, tau / 50_000.0, IntegratorOrder::Fourth).unwrap();
        let last = r.states.last().unwrap();
        let miss = (last.q[0] - 1.0).abs() + last.p[0].abs();
        assert!(miss < 1e-6, "phase-space miss {miss}");
        assert!(!r.accuracy_warning);
    }

    #[test]
    fn fixed_point_stays_fixed() {
        let p = PotentialField::quadratic_saddle(&[1.0, -1.0]);
        let s0 = TrajectoryState {
            q: dv(&[0.0, 0.0]),
            p: dv(&[0.0, 0.0]),
            t: 0.0,
        };
        let r = integrate_orbit(&p, &s0, &[1.0, 1.0], 1.0, 1e-3, IntegratorOrder::Second).unwrap();
        for st in &r.states {
            assert_eq!(st.q.norm(), 0.0);
            assert_eq!(st.p.norm(), 0.0);
        }
    }

    #[test]
    fn unstable_direction_grows_like_cosh() {
        // V = -x^2, m = 1: x(t) = delta cosh(sqrt(2) t)
        let p = PotentialField::quadratic_saddle(&[-1.0]);
        let delta = 1e-6;
        let s0 = TrajectoryState {
            q: dv(&[delta]),
            p: dv(&[0.0]),
            t: 0.0,
        };
        let r = integrate_orbit(&p, &s0, &[1.0], 2.0, 1e-4, IntegratorOrder::Second).unwrap();
        let last = r.states.last().unwrap();
        let expect = delta * (2.0f64.sqrt() * 2.0).cosh();
        assert_relative_eq!(last.q[0], expect, max_relative = 1e-4);
    }

    #[test]
    fn period_is_amplitude_independent_on_quadratic_frame() {
        let frame = saddle_frame_2d(1.0, -1.0);
        let p = PotentialField::quadratic_saddle(&[1.0, -1.0]);
        let mut periods = Vec::new();
        for amp in [0.5, 2.0] {
            let spec = SaddleOrbitSpec::new(frame.clone(), 1, amp).unwrap();
            periods.push(closed_orbit_period(&p, &spec, 1e-5, 1e-8).unwrap());
        }
        assert!((periods[0] - periods[1]).abs() < 1e-10);
        assert_relative_eq!(
            periods[0],
            2.0 * std::f64::consts::PI / 2.0f64.sqrt(),
            epsilon = 1e-9
        );
    }

    #[test]
    fn lyapunov_rate_from_two_trajectory_divergence() {
        // divergence fit on the quadratic saddle recovers lambda within 1%
        let p = PotentialField::quadratic_saddle(&[1.0, -1.0]);
        let frame = saddle_frame_2d(1.0, -1.0);
        let spec = SaddleOrbitSpec::new(frame, 1, 1.0).unwrap();
        let s0 = spec.initial_state();
        let mut s1 = s0.clone();
        let delta = 1e-9;
        // ambient x2 is the unstable direction of V = x1^2 - x2^2
        s1.q[1] += delta;
        let t_total = 2.0 * spec.period;
        let a = integrate_orbit(&p, &s0, &[1.0, 1.0], t_total, 1e-4, IntegratorOrder::Second)
            .unwrap();
        let b = integrate_orbit(&p, &s1, &[1.0, 1.0], t_total, 1e-4, IntegratorOrder::Second)
            .unwrap();
        let d_end = (&b.states.last().unwrap().q - &a.states.last().unwrap().q).norm();
        let lambda_fit = (d_end / delta).ln() / t_total;
        // cosh growth: ln(cosh(w t))/t -> w minus a ln 2 / t correction
        let w = 2.0f64.sqrt();
        let expect = (delta * (w * t_total).cosh() / delta).ln() / t_total;
        assert_relative_eq!(lambda_fit, expect, max_relative = 1e-3);
        let theta = 2.0 * std::f64::consts::PI;
        let lambda_theory = theta / spec.period;
        // the finite observation window biases the fit by ln(2) / t
        let corrected = lambda_fit + 2.0f64.ln() / t_total;
        assert_relative_eq!(corrected, lambda_theory, max_relative = 0.01);
    }

    #[test]
    fn shooting_handles_anharmonic_longitudinal_orbit() {
        // quartic correction along the stable axis shifts the period
        let p = PotentialField::quadratic_saddle_confined(&[-1.0, 1.0], &[0.0, 0.05]);
        let cp = find_critical_point(&p, &dv(&[0.0, 0.0]), 1e-12).unwrap();
        let frame = SaddleFrame::from_critical_point(&p, &cp, &[1.0, 1.0], 1.0).unwrap();
        let spec = SaddleOrbitSpec::new(frame, 1, 1.0).unwrap();
        let period = closed_orbit_period(&p, &spec, 1e-5, 1e-6).unwrap();
        assert!(period < spec.period, "quartic stiffening shortens the period");
        assert!((period - spec.period).abs() / spec.period < 0.1);
    }
}
