//! Autocorrelation spectroscopy: windowed spectral transform of `C(t)`
//! and exact spectral weights `|c_n|^2` from a computed basis.

use nalgebra::DVector;
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{FftReal, Real};

use super::splitstep::WavePacketRun;

/// Spectral content of a wave-packet run: the windowed transform `S(E)`
/// on an energy grid and, when a basis was supplied, the discrete
/// weights `(E_n, |c_n|^2)`.
#[derive(Debug, Clone)]
pub struct SpectralWeights<T> {
    pub energies: Vec<T>,
    pub s_values: Vec<T>,
    pub discrete: Option<Vec<(T, T)>>,
}

/// Hann-windowed transform of uniformly sampled `C(t)`:
/// `S(E) = |sum_k w_k C(t_k) e^{-i E t_k / hbar}| / sum_k w_k`,
/// normalized so a stationary state gives `S(E_n) = 1`.
pub fn spectral_transform<T: Real>(
    times: &[T],
    overlaps: &[Complex<T>],
    hbar: T,
    e_min: T,
    e_max: T,
    n_energies: usize,
    required_resolution: Option<T>,
) -> Result<SpectralWeights<T>> {
    let n = times.len();
    if n < 8 || overlaps.len() != n {
        return Err(Error::Parameter(
            "need at least 8 matching (t, C) samples".into(),
        ));
    }
    if n_energies < 2 || e_max <= e_min || hbar <= T::zero() {
        return Err(Error::Parameter("invalid energy grid".into()));
    }
    let t_total = times[n - 1] - times[0];
    if t_total <= T::zero() {
        return Err(Error::Parameter("times must be increasing".into()));
    }
    if let Some(res) = required_resolution {
        let achievable = T::two_pi() * hbar / t_total;
        if achievable > res {
            return Err(Error::Resolution(format!(
                "record of length {:e} resolves {:e}, worse than the requested {:e}",
                t_total.as_f64(),
                achievable.as_f64(),
                res.as_f64()
            )));
        }
    }
    // Hann window over the record
    let mut window = Vec::with_capacity(n);
    let mut w_sum = T::zero();
    for k in 0..n {
        let w = T::of(0.5)
            * (T::one() - (T::two_pi() * T::of(k as f64) / T::of((n - 1) as f64)).cos());
        w_sum += w;
        window.push(w);
    }
    let mut energies = Vec::with_capacity(n_energies);
    let mut s_values = Vec::with_capacity(n_energies);
    for i in 0..n_energies {
        let e = e_min
            + (e_max - e_min) * T::of(i as f64) / T::of((n_energies - 1) as f64);
        let (mut re, mut im) = (T::zero(), T::zero());
        for k in 0..n {
            let ang = -e * times[k] / hbar;
            let (c, s) = (ang.cos(), ang.sin());
            // w_k * C_k * e^{i ang}
            re += window[k] * (overlaps[k].re * c - overlaps[k].im * s);
            im += window[k] * (overlaps[k].re * s + overlaps[k].im * c);
        }
        energies.push(e);
        s_values.push((re * re + im * im).sqrt() / w_sum);
    }
    Ok(SpectralWeights {
        energies,
        s_values,
        discrete: None,
    })
}

impl<T: FftReal> WavePacketRun<T> {
    /// Windowed `S(E)` of this run on a uniform energy grid.
    pub fn spectrum(
        &self,
        hbar: T,
        e_min: T,
        e_max: T,
        n_energies: usize,
        required_resolution: Option<T>,
    ) -> Result<SpectralWeights<T>> {
        spectral_transform(
            &self.times,
            &self.overlaps,
            hbar,
            e_min,
            e_max,
            n_energies,
            required_resolution,
        )
    }
}

/// Exact expansion coefficients `c_n = <v_n|state>` of a complex state
/// over real basis vectors sharing its grid, under the grid measure
/// `cell` (the product of grid spacings).
pub fn expand_in_basis<T: Real>(
    basis: &[DVector<T>],
    cell: T,
    state: &[Complex<T>],
) -> Result<Vec<Complex<T>>> {
    let mut out = Vec::with_capacity(basis.len());
    for v in basis {
        if v.len() != state.len() {
            return Err(Error::Parameter(format!(
                "basis vector length {} does not match state length {}",
                v.len(),
                state.len()
            )));
        }
        let (mut re, mut im) = (T::zero(), T::zero());
        for (a, c) in v.iter().zip(state) {
            re += *a * c.re;
            im += *a * c.im;
        }
        out.push(Complex::new(re * cell, im * cell));
    }
    Ok(out)
}

/// Discrete weights `(E_n, |c_n|^2)` of a state over a computed basis.
pub fn discrete_weights<T: Real>(
    eigenvalues: &[T],
    basis: &[DVector<T>],
    cell: T,
    state: &[Complex<T>],
) -> Result<Vec<(T, T)>> {
    if eigenvalues.len() != basis.len() {
        return Err(Error::Parameter(
            "eigenvalue and eigenvector counts differ".into(),
        ));
    }
    let coeffs = expand_in_basis(basis, cell, state)?;
    Ok(eigenvalues
        .iter()
        .zip(&coeffs)
        .map(|(&e, c)| (e, c.re * c.re + c.im * c.im))
        .collect())
}

/// Synthesize the exact autocorrelation `C(t) = sum_n |c_n|^2
/// e^{i E_n t / hbar}` from discrete weights, for cross-checks.
pub fn autocorrelation_from_weights<T: Real>(
    weights: &[(T, T)],
    hbar: T,
    t: T,
) -> Complex<T> {
    let (mut re, mut im) = (T::zero(), T::zero());
    for &(e, w) in weights {
        let ang = e * t / hbar;
        re += w * ang.cos();
        im += w * ang.sin();
    }
    Complex::new(re, im)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn synthetic_run(weights: &[(f64, f64)], dt: f64, steps: usize) -> (Vec<f64>, Vec<Complex<f64>>) {
        let times: Vec<f64> = (0..=steps).map(|k| dt * k as f64).collect();
        let overlaps = times
            .iter()
            .map(|&t| autocorrelation_from_weights(weights, 1.0, t))
            .collect();
        (times, overlaps)
    }

    #[test]
    fn stationary_state_gives_unit_peak_at_its_energy() {
        let (t, c) = synthetic_run(&[(3.0, 1.0)], 0.05, 2000);
        let s = spectral_transform(&t, &c, 1.0, 0.0, 6.0, 601, None).unwrap();
        let (imax, smax) = s
            .s_values
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap();
        assert_relative_eq!(s.energies[imax], 3.0, epsilon = 0.011);
        assert_relative_eq!(*smax, 1.0, epsilon = 1e-6);
    }

    #[test]
    fn two_equal_levels_give_equal_peaks() {
        let (t, c) = synthetic_run(&[(1.0, 0.5), (4.0, 0.5)], 0.05, 4000);
        let s = spectral_transform(&t, &c, 1.0, 0.0, 5.0, 1001, None).unwrap();
        let near = |e0: f64| {
            s.energies
                .iter()
                .zip(&s.s_values)
                .filter(|(e, _)| (*e - e0).abs() < 0.5)
                .map(|(_, v)| *v)
                .fold(0.0f64, f64::max)
        };
        let (p1, p2) = (near(1.0), near(4.0));
        assert_relative_eq!(p1, 0.5, epsilon = 1e-4);
        assert_relative_eq!(p2, 0.5, epsilon = 1e-4);
    }

    #[test]
    fn resolution_guard_rejects_short_records() {
        let (t, c) = synthetic_run(&[(1.0, 1.0)], 0.05, 100);
        // record length 5 resolves ~1.26; request 0.1
        let r = spectral_transform(&t, &c, 1.0, 0.0, 2.0, 10, Some(0.1));
        assert!(matches!(r, Err(Error::Resolution(_))));
        assert!(spectral_transform(&t, &c, 1.0, 0.0, 2.0, 10, Some(2.0)).is_ok());
    }

    #[test]
    fn expansion_is_parseval_complete_on_a_dense_basis() {
        // complete 1D Dirichlet basis: sum |c_n|^2 = 1 for any unit state
        let n = 120;
        let v = vec![0.0; n];
        let (e, vecs, h) = crate::quantum::solve_dirichlet_1d(1.0, 1.0, &v, 0.0, 1.0).unwrap();
        let basis: Vec<DVector<f64>> = (0..n).map(|j| vecs.column(j).clone_owned()).collect();
        // normalized Gaussian-ish complex state on the same grid
        let mut state: Vec<Complex<f64>> = (0..n)
            .map(|i| {
                let x = (i + 1) as f64 / (n + 1) as f64;
                let mag = (-(x - 0.4f64).powi(2) / 0.01).exp();
                Complex::new(mag * (8.0 * x).cos(), mag * (8.0 * x).sin())
            })
            .collect();
        let norm: f64 = state.iter().map(|c| c.norm_sqr()).sum::<f64>() * h;
        let scale = norm.sqrt().recip();
        for c in &mut state {
            *c *= scale;
        }
        let w = discrete_weights(&e, &basis, h, &state).unwrap();
        let total: f64 = w.iter().map(|(_, p)| p).sum();
        assert_relative_eq!(total, 1.0, epsilon = 1e-10);
        assert!(w.iter().all(|&(_, p)| p >= 0.0));
    }
}
