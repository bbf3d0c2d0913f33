//! Split-operator wave-packet propagation on a periodic grid: exact
//! kinetic evolution in the momentum representation alternating with
//! exact potential phase multiplication (Strang splitting).

use std::sync::Arc;

use nalgebra::DVector;
use num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::potential::PotentialField;
use crate::scalar::FftReal;

/// Gaussian initial packet, one entry per axis.
#[derive(Debug, Clone)]
pub struct PacketSpec<T> {
    pub center: Vec<T>,
    pub momentum: Vec<T>,
    /// Position-space standard deviations (`|psi|^2` has variance
    /// `width^2`... the amplitude is `exp(-(x-q)^2 / (4 width^2))`).
    pub width: Vec<T>,
}

/// Periodic computational box `[lo, lo + length)` per axis; `n[1] = 1`
/// reduces to a 1D run.
#[derive(Debug, Clone)]
pub struct PropagationGrid<T> {
    pub lo: [T; 2],
    pub length: [T; 2],
    pub n: [usize; 2],
}

impl<T: FftReal> PropagationGrid<T> {
    pub fn spacing(&self) -> [T; 2] {
        [
            self.length[0] / T::of(self.n[0] as f64),
            self.length[1] / T::of(self.n[1] as f64),
        ]
    }

    fn wavenumbers(&self, axis: usize) -> Vec<T> {
        let n = self.n[axis];
        let base = T::two_pi() / self.length[axis];
        (0..n)
            .map(|j| {
                let j = if j <= n / 2 { j as f64 } else { j as f64 - n as f64 };
                base * T::of(j)
            })
            .collect()
    }
}

/// Record of a propagation: autocorrelation samples, norms, and the
/// initial/final states for downstream expansion.
#[derive(Debug, Clone)]
pub struct WavePacketRun<T> {
    pub times: Vec<T>,
    /// `C(t_k) = <Psi(t_k)|Psi(0)>`, with `C(0) = 1`.
    pub overlaps: Vec<Complex<T>>,
    pub norms: Vec<T>,
    pub dt: T,
    pub grid: PropagationGrid<T>,
    /// Row-major samples of the initial packet, x1 fastest.
    pub initial: Vec<Complex<T>>,
    /// Row-major samples of the final state.
    pub final_state: Vec<Complex<T>>,
    /// Largest single-step deviation of the norm from 1.
    pub max_norm_error: T,
}

fn fft_2d<T: FftReal>(
    data: &mut [Complex<T>],
    n1: usize,
    n2: usize,
    fft1: &Arc<dyn Fft<T>>,
    fft2: &Arc<dyn Fft<T>>,
    scratch: &mut Vec<Complex<T>>,
    column: &mut Vec<Complex<T>>,
) {
    scratch.resize(fft1.get_inplace_scratch_len().max(fft2.get_inplace_scratch_len()), Complex::new(T::zero(), T::zero()));
    for row in data.chunks_exact_mut(n1) {
        fft1.process_with_scratch(row, scratch);
    }
    if n2 > 1 {
        column.resize(n2, Complex::new(T::zero(), T::zero()));
        for j1 in 0..n1 {
            for j2 in 0..n2 {
                column[j2] = data[j2 * n1 + j1];
            }
            fft2.process_with_scratch(column, scratch);
            for j2 in 0..n2 {
                data[j2 * n1 + j1] = column[j2];
            }
        }
    }
}

/// Sample and normalize the Gaussian packet on the grid.
pub fn sample_packet<T: FftReal>(
    grid: &PropagationGrid<T>,
    packet: &PacketSpec<T>,
    hbar: T,
) -> Result<Vec<Complex<T>>> {
    if packet.center.len() != 2 || packet.momentum.len() != 2 || packet.width.len() != 2 {
        return Err(Error::Parameter("packet spec must have two axes".into()));
    }
    if packet.width.iter().any(|&w| w <= T::zero()) || hbar <= T::zero() {
        return Err(Error::Parameter("packet widths and hbar must be positive".into()));
    }
    let [h1, h2] = grid.spacing();
    let mut psi = Vec::with_capacity(grid.n[0] * grid.n[1]);
    for j2 in 0..grid.n[1] {
        let x2 = grid.lo[1] + h2 * T::of(j2 as f64);
        for j1 in 0..grid.n[0] {
            let x1 = grid.lo[0] + h1 * T::of(j1 as f64);
            let mut log_mag = T::zero();
            let mut phase = T::zero();
            for (x, a) in [(x1, 0), (x2, 1)] {
                if grid.n[a] == 1 {
                    continue;
                }
                let d = x - packet.center[a];
                log_mag -= d * d / (T::of(4.0) * packet.width[a] * packet.width[a]);
                phase += packet.momentum[a] * x / hbar;
            }
            let mag = log_mag.exp();
            psi.push(Complex::new(mag * phase.cos(), mag * phase.sin()));
        }
    }
    let norm_sq: T = psi
        .iter()
        .fold(T::zero(), |acc, c| acc + c.re * c.re + c.im * c.im)
        * h1
        * h2;
    if norm_sq <= T::zero() {
        return Err(Error::Numeric("degenerate packet normalization".into()));
    }
    let scale = T::one() / norm_sq.sqrt();
    for c in &mut psi {
        *c = Complex::new(c.re * scale, c.im * scale);
    }
    Ok(psi)
}

/// Propagate `steps` split-operator steps of size `dt` (which may be
/// negative), recording `C(t)` and the norm after every step.
pub fn propagate_splitstep<T: FftReal>(
    potential: &PotentialField<T>,
    masses: [T; 2],
    hbar: T,
    grid: PropagationGrid<T>,
    packet: &PacketSpec<T>,
    dt: T,
    steps: usize,
) -> Result<WavePacketRun<T>> {
    if dt == T::zero() || steps == 0 {
        return Err(Error::Parameter("need dt != 0 and at least one step".into()));
    }
    if masses.iter().any(|&m| m <= T::zero()) {
        return Err(Error::Parameter("masses must be positive".into()));
    }
    let (n1, n2) = (grid.n[0], grid.n[1]);
    if n1 < 2 {
        return Err(Error::Parameter("grid axis 1 must have at least 2 points".into()));
    }
    let dof = n1 * n2;
    let [h1, h2] = grid.spacing();
    let cell = h1 * h2;
    let initial = sample_packet(&grid, packet, hbar)?;
    // potential half-step phases
    let mut point = DVector::zeros(2);
    let mut vhalf = Vec::with_capacity(dof);
    for j2 in 0..n2 {
        point[1] = grid.lo[1] + h2 * T::of(j2 as f64);
        for j1 in 0..n1 {
            point[0] = grid.lo[0] + h1 * T::of(j1 as f64);
            let v = potential.value(&point)?;
            let ang = -v * dt * T::of(0.5) / hbar;
            vhalf.push(Complex::new(ang.cos(), ang.sin()));
        }
    }
    // kinetic full-step phases, row-major like the state
    let k1 = grid.wavenumbers(0);
    let k2 = grid.wavenumbers(1);
    let mut kin = Vec::with_capacity(dof);
    for &q2 in &k2 {
        for &q1 in &k1 {
            let e = hbar * hbar
                * (q1 * q1 / (T::of(2.0) * masses[0]) + q2 * q2 / (T::of(2.0) * masses[1]));
            let ang = -e * dt / hbar;
            kin.push(Complex::new(ang.cos(), ang.sin()));
        }
    }
    let mut planner = FftPlanner::new();
    let fwd1 = planner.plan_fft_forward(n1);
    let inv1 = planner.plan_fft_inverse(n1);
    let fwd2 = planner.plan_fft_forward(n2);
    let inv2 = planner.plan_fft_inverse(n2);
    let fft_scale = T::one() / T::of(dof as f64);

    let mut psi = initial.clone();
    let mut times = Vec::with_capacity(steps + 1);
    let mut overlaps = Vec::with_capacity(steps + 1);
    let mut norms = Vec::with_capacity(steps + 1);
    times.push(T::zero());
    overlaps.push(Complex::new(T::one(), T::zero()));
    norms.push(T::one());
    let mut max_norm_error = T::zero();
    let mut scratch = Vec::new();
    let mut column = Vec::new();
    for k in 0..steps {
        for (c, ph) in psi.iter_mut().zip(&vhalf) {
            *c = *c * *ph;
        }
        fft_2d(&mut psi, n1, n2, &fwd1, &fwd2, &mut scratch, &mut column);
        for (c, ph) in psi.iter_mut().zip(&kin) {
            *c = *c * *ph;
        }
        fft_2d(&mut psi, n1, n2, &inv1, &inv2, &mut scratch, &mut column);
        for (c, ph) in psi.iter_mut().zip(&vhalf) {
            *c = *c * *ph * fft_scale;
        }
        let mut norm_sq = T::zero();
        let (mut c_re, mut c_im) = (T::zero(), T::zero());
        for (cur, init) in psi.iter().zip(&initial) {
            norm_sq += cur.re * cur.re + cur.im * cur.im;
            // conj(current) * initial
            c_re += cur.re * init.re + cur.im * init.im;
            c_im += cur.re * init.im - cur.im * init.re;
        }
        let norm = (norm_sq * cell).sqrt();
        let err = (norm - T::one()).abs();
        if err > max_norm_error {
            max_norm_error = err;
        }
        times.push(dt * T::of((k + 1) as f64));
        overlaps.push(Complex::new(c_re * cell, c_im * cell));
        norms.push(norm);
    }
    // aliasing check: occupancy of the highest momentum octave
    let mut spec = psi.clone();
    fft_2d(&mut spec, n1, n2, &fwd1, &fwd2, &mut scratch, &mut column);
    let mut total = T::zero();
    let mut high = T::zero();
    for j2 in 0..n2 {
        for j1 in 0..n1 {
            let c = spec[j2 * n1 + j1];
            let w = c.re * c.re + c.im * c.im;
            total += w;
            let f1 = k1[j1].abs() / k1[n1 / 2].abs();
            let f2 = if n2 > 1 {
                k2[j2].abs() / k2[n2 / 2].abs()
            } else {
                T::zero()
            };
            if f1 > T::of(0.875) || f2 > T::of(0.875) {
                high += w;
            }
        }
    }
    if high > T::of(1e-8) * total {
        return Err(Error::Resolution(format!(
            "aliasing: fraction {:e} of the final state in the top momentum band",
            (high / total).as_f64()
        )));
    }
    Ok(WavePacketRun {
        times,
        overlaps,
        norms,
        dt,
        grid,
        initial,
        final_state: psi,
        max_norm_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn free_grid() -> PropagationGrid<f64> {
        PropagationGrid {
            lo: [-20.0, 0.0],
            length: [40.0, 1.0],
            n: [256, 1],
        }
    }

    fn packet_1d(width: f64) -> PacketSpec<f64> {
        PacketSpec {
            center: vec![0.0, 0.0],
            momentum: vec![0.0, 0.0],
            width: vec![width, 1.0],
        }
    }

    #[test]
    fn free_gaussian_matches_analytic_spreading_overlap() {
        // |C(t)| = (1 + (hbar t / (4 m sigma^2))^2)^{-1/4}: Gaussian
        // momentum distribution e^{-2 sigma^2 k^2} against the free
        // phase e^{i hbar k^2 t / (2m)}
        let p = PotentialField::quadratic_saddle(&[0.0, 0.0]);
        let sigma = 0.8;
        let run = propagate_splitstep(
            &p,
            [1.0, 1.0],
            1.0,
            free_grid(),
            &packet_1d(sigma),
            0.01,
            300,
        )
        .unwrap();
        for (t, c) in run.times.iter().zip(&run.overlaps) {
            let u = t / (4.0 * sigma * sigma);
            let expect = (1.0 + u * u).powf(-0.25);
            assert_relative_eq!(c.norm(), expect, epsilon = 1e-6);
        }
    }

    #[test]
    fn norms_stay_at_one() {
        let p = PotentialField::quadratic_saddle_confined(&[1.0, -0.05], &[0.0, 1e-4]);
        let grid = PropagationGrid {
            lo: [-8.0, -32.0],
            length: [16.0, 64.0],
            n: [64, 256],
        };
        let packet = PacketSpec {
            center: vec![2.0, 0.0],
            momentum: vec![0.0, 0.0],
            width: vec![0.6, 0.6],
        };
        let run = propagate_splitstep(&p, [1.0, 1.0], 1.0, grid, &packet, 0.02, 500).unwrap();
        assert!(run.max_norm_error < 1e-10 * 500.0);
        assert_eq!(run.overlaps[0], num_complex::Complex::new(1.0, 0.0));
    }

    #[test]
    fn time_reversal_recovers_the_state() {
        let p = PotentialField::quadratic_saddle_confined(&[1.0, 1.0], &[0.01, 0.01]);
        let grid = PropagationGrid {
            lo: [-8.0, -8.0],
            length: [16.0, 16.0],
            n: [64, 64],
        };
        let packet = PacketSpec {
            center: vec![1.0, -0.5],
            momentum: vec![0.3, 0.0],
            width: vec![0.7, 0.7],
        };
        let fwd = propagate_splitstep(&p, [1.0, 1.0], 1.0, grid.clone(), &packet, 0.01, 50)
            .unwrap();
        // propagate the overlap record backwards by reversing dt: after
        // 50 steps of -dt from the forward endpoint, C should return to 1
        // (time reversal of a real potential with conjugation symmetry)
        let back = propagate_splitstep(&p, [1.0, 1.0], 1.0, grid, &packet, -0.01, 50).unwrap();
        for (a, b) in fwd.overlaps.iter().zip(&back.overlaps) {
            assert_relative_eq!(a.re, b.re, epsilon = 1e-10);
            assert_relative_eq!(a.im, -b.im, epsilon = 1e-10);
        }
    }

    #[test]
    fn harmonic_revival_at_the_classical_period() {
        // coherent packet in V = x^2 (omega = sqrt(2)): |C| returns to 1
        // at t = 2 pi / omega
        let p = PotentialField::quadratic_saddle(&[1.0, 0.0]);
        let omega = 2.0f64.sqrt();
        let sigma = (1.0 / (2.0 * omega)).sqrt();
        let grid = free_grid();
        let packet = PacketSpec {
            center: vec![2.0, 0.0],
            momentum: vec![0.0, 0.0],
            width: vec![sigma, 1.0],
        };
        let period = 2.0 * std::f64::consts::PI / omega;
        let steps = 2000;
        let run =
            propagate_splitstep(&p, [1.0, 1.0], 1.0, grid, &packet, period / steps as f64, steps)
                .unwrap();
        let c_end = run.overlaps.last().unwrap().norm();
        assert!(c_end > 0.9999, "revival overlap {c_end}");
        // half-period: packet at the opposite turning point; coherent
        // Gaussians separated by d = 4 overlap as e^{-d^2 / (8 sigma^2)}
        let mid = run.overlaps[steps / 2].norm();
        let expect_mid = (-16.0 / (8.0 * sigma * sigma)).exp();
        assert_relative_eq!(mid, expect_mid, max_relative = 1e-2);
    }

    #[test]
    fn aliasing_is_reported() {
        // fast packet on a coarse grid drives momentum off the band
        let p = PotentialField::quadratic_saddle(&[0.0, 0.0]);
        let grid = PropagationGrid {
            lo: [-10.0, 0.0],
            length: [20.0, 1.0],
            n: [32, 1],
        };
        let packet = PacketSpec {
            center: vec![0.0, 0.0],
            momentum: vec![4.8, 0.0],
            width: vec![0.4, 1.0],
        };
        let r = propagate_splitstep(&p, [1.0, 1.0], 1.0, grid, &packet, 0.01, 5);
        assert!(matches!(r, Err(Error::Resolution(_))));
    }
}
