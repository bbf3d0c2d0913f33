//! Built-in potentials with value / gradient / Hessian access.
//!
//! Three analytic families are provided (quadratic saddle with optional
//! quartic confinement, the cosine ridge, the regularized three-body
//! Coulomb potential in Jacobi coordinates) plus a user-supplied sampled
//! grid. Derivatives are analytic where available and central finite
//! differences otherwise; both paths are exposed so they can be checked
//! against each other.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// How derivatives are produced.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DerivativeMode<T> {
    Analytic,
    /// Central differences with step `h * (1 + |x|)`.
    FiniteDifference { step: T },
}

/// Axis-aligned domain box. `None` bounds mean all of space.
#[derive(Debug, Clone)]
pub struct DomainBox<T> {
    pub lo: DVector<T>,
    pub hi: DVector<T>,
}

impl<T: Real> DomainBox<T> {
    pub fn contains(&self, x: &DVector<T>) -> bool {
        x.iter()
            .zip(self.lo.iter().zip(self.hi.iter()))
            .all(|(&xi, (&lo, &hi))| xi >= lo && xi <= hi)
    }
}

/// Potential sampled on a uniform grid (1D or 2D), multilinear interpolation.
#[derive(Debug, Clone)]
pub struct SampledGrid<T> {
    pub origin: DVector<T>,
    pub spacing: DVector<T>,
    /// Grid shape, one entry per dimension.
    pub shape: Vec<usize>,
    /// Row-major samples, first coordinate fastest.
    pub values: Vec<T>,
}

impl<T: Real> SampledGrid<T> {
    fn value(&self, x: &DVector<T>) -> Result<T> {
        match self.shape.len() {
            1 => {
                let (i, f) = self.locate(0, x[0])?;
                Ok(self.values[i] * (T::one() - f) + self.values[i + 1] * f)
            }
            2 => {
                let (i, fi) = self.locate(0, x[0])?;
                let (j, fj) = self.locate(1, x[1])?;
                let n0 = self.shape[0];
                let at = |a: usize, b: usize| self.values[b * n0 + a];
                let lo = at(i, j) * (T::one() - fi) + at(i + 1, j) * fi;
                let hi = at(i, j + 1) * (T::one() - fi) + at(i + 1, j + 1) * fi;
                Ok(lo * (T::one() - fj) + hi * fj)
            }
            d => Err(Error::Parameter(format!(
                "sampled-grid potential supports 1 or 2 dimensions, got {d}"
            ))),
        }
    }

    fn locate(&self, axis: usize, x: T) -> Result<(usize, T)> {
        let t = (x - self.origin[axis]) / self.spacing[axis];
        let n = self.shape[axis];
        if t < T::zero() || t > T::of((n - 1) as f64) {
            return Err(Error::Domain(format!("sampled grid axis {axis}")));
        }
        let i = (t.floor().as_f64() as usize).min(n - 2);
        Ok((i, t - T::of(i as f64)))
    }
}

#[derive(Debug, Clone)]
pub enum PotentialKind<T> {
    /// `V = sum_i sigma_i x_i^2 + quartic_i x_i^4`.
    QuadraticSaddle {
        sigmas: DVector<T>,
        quartic: DVector<T>,
    },
    /// `V = 2 g cos(x)`, one-dimensional.
    Cosine { g: T },
    /// Regularized three-body Coulomb potential, 6D in `(r, eta)`.
    CoulombRegularized { eps: T },
    Sampled(SampledGrid<T>),
}

#[derive(Debug, Clone)]
pub struct PotentialField<T> {
    pub kind: PotentialKind<T>,
    pub dimension: usize,
    pub domain: Option<DomainBox<T>>,
    pub derivative_mode: DerivativeMode<T>,
}

impl<T: Real> PotentialField<T> {
    pub fn quadratic_saddle(sigmas: &[T]) -> Self {
        Self::quadratic_saddle_confined(sigmas, &vec![T::zero(); sigmas.len()])
    }

    /// Quadratic saddle plus per-axis quartic confinement.
    pub fn quadratic_saddle_confined(sigmas: &[T], quartic: &[T]) -> Self {
        assert_eq!(sigmas.len(), quartic.len());
        PotentialField {
            dimension: sigmas.len(),
            kind: PotentialKind::QuadraticSaddle {
                sigmas: DVector::from_row_slice(sigmas),
                quartic: DVector::from_row_slice(quartic),
            },
            domain: None,
            derivative_mode: DerivativeMode::Analytic,
        }
    }

    pub fn cosine(g: T) -> Self {
        PotentialField {
            dimension: 1,
            kind: PotentialKind::Cosine { g },
            domain: None,
            derivative_mode: DerivativeMode::Analytic,
        }
    }

    pub fn coulomb_regularized(eps: T) -> Result<Self> {
        if eps <= T::zero() {
            return Err(Error::Parameter("coulomb regularization eps must be > 0".into()));
        }
        Ok(PotentialField {
            dimension: 6,
            kind: PotentialKind::CoulombRegularized { eps },
            domain: None,
            derivative_mode: DerivativeMode::Analytic,
        })
    }

    pub fn sampled(grid: SampledGrid<T>, step: T) -> Self {
        let dim = grid.shape.len();
        let lo = grid.origin.clone();
        let hi = DVector::from_iterator(
            dim,
            (0..dim).map(|a| grid.origin[a] + grid.spacing[a] * T::of((grid.shape[a] - 1) as f64)),
        );
        PotentialField {
            dimension: dim,
            kind: PotentialKind::Sampled(grid),
            domain: Some(DomainBox { lo, hi }),
            derivative_mode: DerivativeMode::FiniteDifference { step },
        }
    }

    pub fn with_domain(mut self, lo: DVector<T>, hi: DVector<T>) -> Self {
        self.domain = Some(DomainBox { lo, hi });
        self
    }

    pub fn with_finite_differences(mut self, step: T) -> Self {
        self.derivative_mode = DerivativeMode::FiniteDifference { step };
        self
    }

    fn check_domain(&self, x: &DVector<T>) -> Result<()> {
        if x.len() != self.dimension {
            return Err(Error::Parameter(format!(
                "position has dimension {}, potential has {}",
                x.len(),
                self.dimension
            )));
        }
        if let Some(b) = &self.domain {
            if !b.contains(x) {
                return Err(Error::Domain(format!("{x:?}")));
            }
        }
        Ok(())
    }

    pub fn value(&self, x: &DVector<T>) -> Result<T> {
        self.check_domain(x)?;
        let v = match &self.kind {
            PotentialKind::QuadraticSaddle { sigmas, quartic } => {
                let mut v = T::zero();
                for i in 0..x.len() {
                    let x2 = x[i] * x[i];
                    v += sigmas[i] * x2 + quartic[i] * x2 * x2;
                }
                v
            }
            PotentialKind::Cosine { g } => T::of(2.0) * *g * x[0].cos(),
            PotentialKind::CoulombRegularized { eps } => coulomb_value(x, *eps),
            PotentialKind::Sampled(grid) => grid.value(x)?,
        };
        if !v.is_finite() {
            return Err(Error::Numeric(format!("non-finite potential at {x:?}")));
        }
        Ok(v)
    }

    pub fn gradient(&self, x: &DVector<T>) -> Result<DVector<T>> {
        self.check_domain(x)?;
        match (&self.kind, self.derivative_mode) {
            (_, DerivativeMode::FiniteDifference { step }) => self.fd_gradient(x, step),
            (PotentialKind::QuadraticSaddle { sigmas, quartic }, _) => {
                Ok(DVector::from_iterator(
                    x.len(),
                    (0..x.len()).map(|i| {
                        T::of(2.0) * sigmas[i] * x[i] + T::of(4.0) * quartic[i] * x[i].powi(3)
                    }),
                ))
            }
            (PotentialKind::Cosine { g }, _) => {
                Ok(DVector::from_element(1, -T::of(2.0) * *g * x[0].sin()))
            }
            (PotentialKind::CoulombRegularized { eps }, _) => Ok(coulomb_gradient(x, *eps)),
            (PotentialKind::Sampled(_), _) => {
                self.fd_gradient(x, T::of(crate::DEFAULT_FD_STEP))
            }
        }
    }

    pub fn hessian(&self, x: &DVector<T>) -> Result<DMatrix<T>> {
        self.check_domain(x)?;
        match (&self.kind, self.derivative_mode) {
            (_, DerivativeMode::FiniteDifference { step }) => self.fd_hessian(x, step),
            (PotentialKind::QuadraticSaddle { sigmas, quartic }, _) => {
                let mut h = DMatrix::zeros(x.len(), x.len());
                for i in 0..x.len() {
                    h[(i, i)] = T::of(2.0) * sigmas[i] + T::of(12.0) * quartic[i] * x[i] * x[i];
                }
                Ok(h)
            }
            (PotentialKind::Cosine { g }, _) => {
                Ok(DMatrix::from_element(1, 1, -T::of(2.0) * *g * x[0].cos()))
            }
            (PotentialKind::CoulombRegularized { eps }, _) => Ok(coulomb_hessian(x, *eps)),
            (PotentialKind::Sampled(_), _) => self.fd_hessian(x, T::of(crate::DEFAULT_FD_STEP)),
        }
    }

    /// Value, gradient and (symmetrized) Hessian in one call.
    pub fn evaluate_with_derivatives(
        &self,
        x: &DVector<T>,
    ) -> Result<(T, DVector<T>, DMatrix<T>)> {
        let v = self.value(x)?;
        let g = self.gradient(x)?;
        let mut h = self.hessian(x)?;
        let ht = h.transpose();
        h = (h + ht) * T::of(0.5);
        Ok((v, g, h))
    }

    fn fd_gradient(&self, x: &DVector<T>, step: T) -> Result<DVector<T>> {
        let h = step * (T::one() + x.norm());
        let mut g = DVector::zeros(x.len());
        let mut xp = x.clone();
        for i in 0..x.len() {
            xp[i] = x[i] + h;
            let vp = self.value(&xp)?;
            xp[i] = x[i] - h;
            let vm = self.value(&xp)?;
            xp[i] = x[i];
            g[i] = (vp - vm) / (T::of(2.0) * h);
        }
        Ok(g)
    }

    fn fd_hessian(&self, x: &DVector<T>, step: T) -> Result<DMatrix<T>> {
        // larger step than for the gradient: second differences lose more bits
        let h = step.sqrt() * T::of(1e-2) * (T::one() + x.norm());
        let n = x.len();
        let mut m = DMatrix::zeros(n, n);
        let v0 = self.value(x)?;
        let mut xp = x.clone();
        for i in 0..n {
            xp[i] = x[i] + h;
            let vp = self.value(&xp)?;
            xp[i] = x[i] - h;
            let vm = self.value(&xp)?;
            xp[i] = x[i];
            m[(i, i)] = (vp - T::of(2.0) * v0 + vm) / (h * h);
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let mut probe = |si: T, sj: T| -> Result<T> {
                    xp[i] = x[i] + si * h;
                    xp[j] = x[j] + sj * h;
                    let v = self.value(&xp)?;
                    xp[i] = x[i];
                    xp[j] = x[j];
                    Ok(v)
                };
                let vpp = probe(T::one(), T::one())?;
                let vpm = probe(T::one(), -T::one())?;
                let vmp = probe(-T::one(), T::one())?;
                let vmm = probe(-T::one(), -T::one())?;
                let d = (vpp - vpm - vmp + vmm) / (T::of(4.0) * h * h);
                m[(i, j)] = d;
                m[(j, i)] = d;
            }
        }
        Ok(m)
    }
}

/// Regularized distance `|rho|_eps = sqrt(rho.rho + eps^2)`.
fn reg_norm<T: Real>(rho: &[T; 3], eps: T) -> T {
    (rho[0] * rho[0] + rho[1] * rho[1] + rho[2] * rho[2] + eps * eps).sqrt()
}

/// The three Coulomb terms as (sign, rho(x), jacobian rows) with
/// rho_1 = r, rho_2 = r/2 - eta, rho_3 = r/2 + eta.
fn coulomb_terms<T: Real>(x: &DVector<T>) -> [(T, [T; 3], [[T; 6]; 3]); 3] {
    let half = T::of(0.5);
    let r = [x[0], x[1], x[2]];
    let eta = [x[3], x[4], x[5]];
    let mut out = [
        (T::one(), r, [[T::zero(); 6]; 3]),
        (
            -T::one(),
            [
                half * r[0] - eta[0],
                half * r[1] - eta[1],
                half * r[2] - eta[2],
            ],
            [[T::zero(); 6]; 3],
        ),
        (
            -T::one(),
            [
                half * r[0] + eta[0],
                half * r[1] + eta[1],
                half * r[2] + eta[2],
            ],
            [[T::zero(); 6]; 3],
        ),
    ];
    for k in 0..3 {
        out[0].2[k][k] = T::one();
        out[1].2[k][k] = half;
        out[1].2[k][k + 3] = -T::one();
        out[2].2[k][k] = half;
        out[2].2[k][k + 3] = T::one();
    }
    out
}

pub(crate) fn coulomb_value<T: Real>(x: &DVector<T>, eps: T) -> T {
    coulomb_terms(x)
        .iter()
        .map(|(s, rho, _)| *s / reg_norm(rho, eps))
        .fold(T::zero(), |a, b| a + b)
}

fn coulomb_gradient<T: Real>(x: &DVector<T>, eps: T) -> DVector<T> {
    let mut g = DVector::zeros(6);
    for (s, rho, jac) in coulomb_terms(x).iter() {
        let n = reg_norm(rho, eps);
        let n3 = n * n * n;
        // d/drho_k of s/|rho|_eps = -s rho_k / n^3, chained through the jacobian
        for k in 0..3 {
            let gk = -*s * rho[k] / n3;
            for c in 0..6 {
                g[c] += gk * jac[k][c];
            }
        }
    }
    g
}

fn coulomb_hessian<T: Real>(x: &DVector<T>, eps: T) -> DMatrix<T> {
    let mut h = DMatrix::zeros(6, 6);
    for (s, rho, jac) in coulomb_terms(x).iter() {
        let n = reg_norm(rho, eps);
        let n3 = n * n * n;
        let n5 = n3 * n * n;
        // d2/drho_k drho_l = s (3 rho_k rho_l / n^5 - delta_kl / n^3)
        for k in 0..3 {
            for l in 0..3 {
                let mut hkl = *s * T::of(3.0) * rho[k] * rho[l] / n5;
                if k == l {
                    hkl -= *s / n3;
                }
                for a in 0..6 {
                    for b in 0..6 {
                        h[(a, b)] += hkl * jac[k][a] * jac[l][b];
                    }
                }
            }
        }
    }
    h
}
