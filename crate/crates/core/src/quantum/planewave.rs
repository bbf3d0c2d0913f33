//! Exact 1D eigensolver for 2 pi-periodic potentials in the plane-wave
//! basis `e^{ikx} / sqrt(2 pi)`, k = -K..K.

use nalgebra::{DMatrix, DVector};

use crate::critical::symmetric_eigen_sorted;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Lowest part of a 2 pi-periodic 1D spectrum with plane-wave
/// eigenvector coefficients.
#[derive(Debug, Clone)]
pub struct Spectrum1D<T> {
    /// Ascending energies, lowest `n_levels`.
    pub eigenvalues: Vec<T>,
    /// One column of 2K+1 plane-wave coefficients per level
    /// (real, since the potential is a real cosine series).
    pub eigenvectors: DMatrix<T>,
    /// Basis half-size K.
    pub k_half: usize,
    pub mass: T,
    pub hbar: T,
}

/// Diagonalize `H = hbar^2 k^2 / (2m) + V` for a real cosine-series
/// potential `V(x) = sum_m c_m cos(m x)` given as `(m, c_m)` pairs.
pub fn solve_periodic_1d<T: Real>(
    mass: T,
    hbar: T,
    cosine_coefficients: &[(usize, T)],
    k_half: usize,
    n_levels: usize,
) -> Result<Spectrum1D<T>> {
    if k_half < 16 {
        return Err(Error::Parameter("basis half-size K must be at least 16".into()));
    }
    if mass <= T::zero() || hbar <= T::zero() {
        return Err(Error::Parameter("mass and hbar must be positive".into()));
    }
    let dim = 2 * k_half + 1;
    if n_levels == 0 || n_levels > dim {
        return Err(Error::Parameter(format!(
            "n_levels must be in 1..={dim}"
        )));
    }
    let mut h = DMatrix::zeros(dim, dim);
    for i in 0..dim {
        let k = i as f64 - k_half as f64;
        h[(i, i)] = hbar * hbar * T::of(k * k) / (T::of(2.0) * mass);
    }
    for &(m, c) in cosine_coefficients {
        if m == 0 {
            for i in 0..dim {
                h[(i, i)] += c;
            }
            continue;
        }
        // cos(m x) couples k and k +/- m with amplitude 1/2
        let half = c * T::of(0.5);
        for i in 0..dim.saturating_sub(m) {
            h[(i, i + m)] += half;
            h[(i + m, i)] += half;
        }
    }
    let (values, vectors) = symmetric_eigen_sorted(&h);
    let eigenvalues: Vec<T> = values.iter().take(n_levels).copied().collect();
    let mut eigenvectors = DMatrix::zeros(dim, n_levels);
    for j in 0..n_levels {
        let mut col = vectors.column(j).clone_owned();
        // deterministic sign: largest-magnitude coefficient positive
        let lead = col.iter().cloned().fold(T::zero(), |a, b| {
            if b.abs() > a.abs() {
                b
            } else {
                a
            }
        });
        if lead < T::zero() {
            col = -col;
        }
        eigenvectors.set_column(j, &col);
    }
    Ok(Spectrum1D {
        eigenvalues,
        eigenvectors,
        k_half,
        mass,
        hbar,
    })
}

impl<T: Real> Spectrum1D<T> {
    /// Probability density `|F(x)|^2` of level `level` sampled on `n`
    /// uniform points of `[-pi, pi)`; integrates to 1 over the period.
    pub fn density_on_grid(&self, level: usize, n: usize) -> Result<(Vec<T>, Vec<T>)> {
        if level >= self.eigenvalues.len() {
            return Err(Error::Parameter(format!("level {level} not computed")));
        }
        if n < 2 {
            return Err(Error::Parameter("need at least two grid points".into()));
        }
        let coeffs = self.eigenvectors.column(level);
        let mut xs = Vec::with_capacity(n);
        let mut dens = Vec::with_capacity(n);
        let norm = T::one() / T::two_pi();
        for i in 0..n {
            let x = T::pi() * (T::of(2.0) * T::of(i as f64) / T::of(n as f64) - T::one());
            let (mut re, mut im) = (T::zero(), T::zero());
            for j in 0..coeffs.len() {
                let k = T::of(j as f64 - self.k_half as f64);
                re += coeffs[j] * (k * x).cos();
                im += coeffs[j] * (k * x).sin();
            }
            xs.push(x);
            dens.push((re * re + im * im) * norm);
        }
        Ok((xs, dens))
    }

    /// Residual `||H v - E v||` of a returned pair, for verification.
    pub fn residual(&self, cosine_coefficients: &[(usize, T)], level: usize) -> Result<T> {
        let dim = 2 * self.k_half + 1;
        let v = self.eigenvectors.column(level).clone_owned();
        let mut hv = DVector::zeros(dim);
        for i in 0..dim {
            let k = i as f64 - self.k_half as f64;
            hv[i] = self.hbar * self.hbar * T::of(k * k) / (T::of(2.0) * self.mass) * v[i];
        }
        for &(m, c) in cosine_coefficients {
            if m == 0 {
                for i in 0..dim {
                    hv[i] += c * v[i];
                }
                continue;
            }
            let half = c * T::of(0.5);
            for i in 0..dim.saturating_sub(m) {
                hv[i] += half * v[i + m];
                hv[i + m] += half * v[i];
            }
        }
        Ok((hv - v * self.eigenvalues[level]).norm())
    }
}
