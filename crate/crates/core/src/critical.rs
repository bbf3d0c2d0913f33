//! Critical-point location and local saddle frames.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::potential::PotentialField;
use crate::scalar::Real;

pub const DEFAULT_NEWTON_TOL: f64 = 1e-10;
pub const DEFAULT_NEWTON_MAX_ITER: usize = 100;

/// A critical point of the potential with its eigen-classified Hessian.
#[derive(Debug, Clone)]
pub struct CriticalPoint<T> {
    pub location: DVector<T>,
    pub hessian: DMatrix<T>,
    /// Hessian eigenvalues, ascending.
    pub eigenvalues: DVector<T>,
    /// Corresponding orthonormal eigenvectors, one per column.
    pub eigenvectors: DMatrix<T>,
    /// Morse index: number of negative Hessian eigenvalues.
    pub index: usize,
}

/// Local normal-form frame at a saddle: `V(origin + sum y_i axis_i)
/// = V(origin) + sum sigma_i y_i^2 + o(|y|^2)`.
#[derive(Debug, Clone)]
pub struct SaddleFrame<T> {
    pub origin: DVector<T>,
    /// Principal axes, one per column, same order as `sigmas`.
    pub axes: DMatrix<T>,
    /// Half the Hessian eigenvalues, signed.
    pub sigmas: DVector<T>,
    pub masses: DVector<T>,
    pub hbar: T,
    /// Potential value at the origin.
    pub v_saddle: T,
}

/// Eigen-decompose a symmetric matrix, eigenvalues ascending.
pub fn symmetric_eigen_sorted<T: Real>(m: &DMatrix<T>) -> (DVector<T>, DMatrix<T>) {
    let eig = m.clone().symmetric_eigen();
    let n = m.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
    let values = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut vectors = DMatrix::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        vectors.set_column(k, &eig.eigenvectors.column(i));
    }
    (values, vectors)
}

/// Newton iteration on the gradient from `x0`.
pub fn find_critical_point<T: Real>(
    potential: &PotentialField<T>,
    x0: &DVector<T>,
    newton_tol: T,
) -> Result<CriticalPoint<T>> {
    let mut x = x0.clone();
    for _ in 0..DEFAULT_NEWTON_MAX_ITER {
        let g = potential.gradient(&x)?;
        if g.norm() <= newton_tol {
            return classify(potential, x);
        }
        let h = potential.hessian(&x)?;
        let lu = h.lu();
        let step = lu
            .solve(&g)
            .ok_or_else(|| Error::Singular("hessian singular along Newton path".into()))?;
        x -= step;
        if !x.iter().all(|v| v.is_finite()) {
            return Err(Error::NoConvergence("Newton iterate became non-finite".into()));
        }
    }
    let g = potential.gradient(&x)?;
    if g.norm() <= newton_tol {
        return classify(potential, x);
    }
    Err(Error::NoConvergence(format!(
        "|grad| = {:e} after {} Newton steps",
        g.norm().as_f64(),
        DEFAULT_NEWTON_MAX_ITER
    )))
}

fn classify<T: Real>(potential: &PotentialField<T>, x: DVector<T>) -> Result<CriticalPoint<T>> {
    let (_, _, hessian) = potential.evaluate_with_derivatives(&x)?;
    let (eigenvalues, eigenvectors) = symmetric_eigen_sorted(&hessian);
    let index = eigenvalues.iter().filter(|&&v| v < T::zero()).count();
    Ok(CriticalPoint {
        location: x,
        hessian,
        eigenvalues,
        eigenvectors,
        index,
    })
}

impl<T: Real> SaddleFrame<T> {
    /// Frame at a genuine saddle: needs at least one stable and one
    /// unstable direction.
    pub fn from_critical_point(
        potential: &PotentialField<T>,
        cp: &CriticalPoint<T>,
        masses: &[T],
        hbar: T,
    ) -> Result<Self> {
        let d = cp.eigenvalues.len();
        if cp.index == 0 || cp.index == d {
            return Err(Error::NotASaddle(format!(
                "critical point has Morse index {} in dimension {d}",
                cp.index
            )));
        }
        Self::build(potential, cp, masses, hbar)
    }

    /// Purely transverse frame at a potential maximum (all directions
    /// unstable). This is the 1D ridge case of the cosine benchmark.
    pub fn transverse_at_maximum(
        potential: &PotentialField<T>,
        cp: &CriticalPoint<T>,
        masses: &[T],
        hbar: T,
    ) -> Result<Self> {
        let d = cp.eigenvalues.len();
        if cp.index != d {
            return Err(Error::NotASaddle(format!(
                "expected a maximum (index {d}), got index {}",
                cp.index
            )));
        }
        Self::build(potential, cp, masses, hbar)
    }

    fn build(
        potential: &PotentialField<T>,
        cp: &CriticalPoint<T>,
        masses: &[T],
        hbar: T,
    ) -> Result<Self> {
        let d = cp.eigenvalues.len();
        if masses.len() != d {
            return Err(Error::Parameter(format!(
                "expected {d} masses, got {}",
                masses.len()
            )));
        }
        if masses.iter().any(|&m| m <= T::zero()) || hbar <= T::zero() {
            return Err(Error::Parameter("masses and hbar must be positive".into()));
        }
        let v_saddle = potential.value(&cp.location)?;
        Ok(SaddleFrame {
            origin: cp.location.clone(),
            axes: cp.eigenvectors.clone(),
            sigmas: cp.eigenvalues.map(|v| v * T::of(0.5)),
            masses: DVector::from_row_slice(masses),
            hbar,
            v_saddle,
        })
    }

    pub fn dimension(&self) -> usize {
        self.sigmas.len()
    }

    /// Indices of stable (sigma > 0) directions.
    pub fn stable_axes(&self) -> Vec<usize> {
        (0..self.sigmas.len())
            .filter(|&i| self.sigmas[i] > T::zero())
            .collect()
    }

    /// Indices of unstable (sigma < 0) directions.
    pub fn unstable_axes(&self) -> Vec<usize> {
        (0..self.sigmas.len())
            .filter(|&i| self.sigmas[i] < T::zero())
            .collect()
    }

    /// Harmonic frequency of a stable axis: `omega = sqrt(2 sigma / m)`.
    pub fn omega(&self, axis: usize) -> Result<T> {
        if self.sigmas[axis] <= T::zero() {
            return Err(Error::NotASaddle(format!("axis {axis} is not stable")));
        }
        Ok((T::of(2.0) * self.sigmas[axis] / self.masses[axis]).sqrt())
    }

    /// Map frame coordinates to configuration space.
    pub fn to_ambient(&self, y: &DVector<T>) -> DVector<T> {
        &self.origin + &self.axes * y
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::PotentialField;
    use approx::assert_relative_eq;

    fn dv(xs: &[f64]) -> DVector<f64> {
        DVector::from_row_slice(xs)
    }

    #[test]
    fn cosine_maximum_found_from_offset_start() {
        let p = PotentialField::cosine(50.0);
        let cp = find_critical_point(&p, &dv(&[0.3]), 1e-10).unwrap();
        assert_relative_eq!(cp.location[0], 0.0, epsilon = 1e-10);
        assert_eq!(cp.index, 1);
    }

    #[test]
    fn quadratic_saddle_converges_in_one_step() {
        let p = PotentialField::quadratic_saddle(&[1.0, -2.0]);
        let cp = find_critical_point(&p, &dv(&[3.0, -4.0]), 1e-12).unwrap();
        assert!(cp.location.norm() < 1e-12);
        assert_eq!(cp.index, 1);
        assert_relative_eq!(cp.eigenvalues[0], -4.0, epsilon = 1e-12);
        assert_relative_eq!(cp.eigenvalues[1], 2.0, epsilon = 1e-12);
    }

    #[test]
    fn coulomb_triple_collision_is_3_stable_3_unstable() {
        let p = PotentialField::coulomb_regularized(0.1).unwrap();
        let cp = find_critical_point(&p, &dv(&[0.01, 0.0, -0.01, 0.005, 0.0, 0.0]), 1e-10).unwrap();
        assert!(cp.location.norm() < 1e-8);
        assert_eq!(cp.index, 3);
    }

    #[test]
    fn eigen_decomposition_round_trip() {
        let p = PotentialField::coulomb_regularized(0.1).unwrap();
        let x = dv(&[0.02, 0.01, 0.0, -0.01, 0.03, 0.02]);
        let h = p.hessian(&x).unwrap();
        let (vals, vecs) = symmetric_eigen_sorted(&h);
        let rebuilt = &vecs * DMatrix::from_diagonal(&vals) * vecs.transpose();
        assert!((&rebuilt - &h).norm() <= 1e-10 * h.norm());
        let gram = vecs.transpose() * &vecs;
        assert!((gram - DMatrix::identity(6, 6)).norm() < 1e-10);
    }

    #[test]
    fn saddle_frame_reads_off_sigmas() {
        let p = PotentialField::quadratic_saddle(&[1.0, -2.0]);
        let cp = find_critical_point(&p, &dv(&[0.1, 0.1]), 1e-12).unwrap();
        let f = SaddleFrame::from_critical_point(&p, &cp, &[1.0, 1.0], 1.0).unwrap();
        assert_relative_eq!(f.sigmas[0], -2.0, epsilon = 1e-12);
        assert_relative_eq!(f.sigmas[1], 1.0, epsilon = 1e-12);
        assert_eq!(f.stable_axes(), vec![1]);
        assert_eq!(f.unstable_axes(), vec![0]);
    }

    #[test]
    fn rotated_saddle_recovers_axes_and_sigmas() {
        // V in rotated coordinates: principal sigmas must be invariant.
        let c = std::f64::consts::FRAC_1_SQRT_2;
        let rot = DMatrix::from_row_slice(2, 2, &[c, -c, c, c]);
        let lam = DMatrix::from_diagonal(&dv(&[2.0, -4.0])); // hessian eigenvalues
        let h = &rot * lam * rot.transpose();
        let (vals, vecs) = symmetric_eigen_sorted(&h);
        assert_relative_eq!(vals[0], -4.0, epsilon = 1e-12);
        assert_relative_eq!(vals[1], 2.0, epsilon = 1e-12);
        let gram = vecs.transpose() * &vecs;
        assert!((gram - DMatrix::identity(2, 2)).norm() < 1e-10);
    }

    #[test]
    fn frame_rejects_pure_minimum() {
        let p = PotentialField::quadratic_saddle(&[1.0, 2.0]);
        let cp = find_critical_point(&p, &dv(&[0.1, 0.1]), 1e-12).unwrap();
        let r = SaddleFrame::from_critical_point(&p, &cp, &[1.0, 1.0], 1.0);
        assert!(matches!(r, Err(Error::NotASaddle(_))));
    }

    #[test]
    fn transverse_frame_for_cosine_ridge() {
        let p = PotentialField::cosine(50.0);
        let cp = find_critical_point(&p, &dv(&[0.2]), 1e-10).unwrap();
        let f = SaddleFrame::transverse_at_maximum(&p, &cp, &[0.5], 1.0).unwrap();
        assert_relative_eq!(f.sigmas[0], -50.0, epsilon = 1e-8);
        assert_relative_eq!(f.v_saddle, 100.0, epsilon = 1e-10);
    }

    #[test]
    fn quadratic_fit_residual_is_cubic_or_better() {
        // log-log regression of |V - quadratic model| along each axis
        let p = PotentialField::cosine(50.0);
        let cp = find_critical_point(&p, &dv(&[0.0]), 1e-12).unwrap();
        let f = SaddleFrame::transverse_at_maximum(&p, &cp, &[0.5], 1.0).unwrap();
        let mut pts = Vec::new();
        for k in 1..=8 {
            let y = 0.05 * k as f64;
            let x = f.to_ambient(&dv(&[y]));
            let v = p.value(&x).unwrap();
            let resid = (v - f.v_saddle - f.sigmas[0] * y * y).abs();
            pts.push((y.ln(), resid.ln()));
        }
        let n = pts.len() as f64;
        let sx: f64 = pts.iter().map(|p| p.0).sum();
        let sy: f64 = pts.iter().map(|p| p.1).sum();
        let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
        let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
        let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        assert!(slope >= 2.9, "fit exponent {slope}");
    }
}
