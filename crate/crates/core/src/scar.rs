//! Predicted scar densities near a saddle: transverse cosine factor,
//! harmonic longitudinal profile, multiple-passing amplitude sum,
//! energy-smoothed local density of states, and the scar-energy ladder.

use nalgebra::DVector;
use num_complex::Complex;

use crate::critical::SaddleFrame;
use crate::dynamics::{multi_pass_coefficients, TransverseCoefficients};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Transverse profile `cos(W x2^2 / (2 hbar))` of the scar density.
pub fn transverse_scar_factor<T: Real>(w: T, hbar: T, x2: T) -> T {
    (w * x2 * x2 / (T::of(2.0) * hbar)).cos()
}

/// Position of the first node of the transverse factor, `sqrt(pi hbar / W)`.
pub fn transverse_first_node<T: Real>(w: T, hbar: T) -> Result<T> {
    if w <= T::zero() || hbar <= T::zero() {
        return Err(Error::Parameter("need W > 0 and hbar > 0".into()));
    }
    Ok((T::pi() * hbar / w).sqrt())
}

/// Normalized harmonic-oscillator eigenfunction of the stable
/// longitudinal direction, evaluated via the Hermite-function
/// recurrence (numerically stable for all n).
pub fn longitudinal_wavefunction<T: Real>(
    frame: &SaddleFrame<T>,
    stable_axis: usize,
    n: usize,
    x1: T,
) -> Result<T> {
    let omega = frame.omega(stable_axis)?;
    let m = frame.masses[stable_axis];
    hermite_function(n, m * omega / frame.hbar, x1)
}

/// `psi_n(x) = (a/pi)^{1/4} / sqrt(2^n n!) H_n(sqrt(a) x) e^{-a x^2/2}`
/// with `a = m omega / hbar`, computed by the recurrence on the
/// normalized Hermite functions `h_n = psi_n`.
pub fn hermite_function<T: Real>(n: usize, a: T, x: T) -> Result<T> {
    if a <= T::zero() {
        return Err(Error::Parameter("oscillator scale must be positive".into()));
    }
    let u = a.sqrt() * x;
    let h0 = (a / T::pi()).sqrt().sqrt() * (-u * u * T::of(0.5)).exp();
    if n == 0 {
        return Ok(h0);
    }
    // h_{k+1} = sqrt(2/(k+1)) u h_k - sqrt(k/(k+1)) h_{k-1}
    let mut prev = h0;
    let mut cur = T::of(2.0).sqrt() * u * h0;
    for k in 1..n {
        let kf = T::of(k as f64);
        let next = (T::of(2.0) / (kf + T::one())).sqrt() * u * cur
            - (kf / (kf + T::one())).sqrt() * prev;
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

/// The predicted scar density `cos(W_n x2^2/2 hbar) |psi_n(x1)|^2` in
/// saddle-frame coordinates, clamped at the first transverse node.
#[derive(Debug, Clone)]
pub struct ScarDensityModel<T> {
    pub frame: SaddleFrame<T>,
    /// Longitudinal (stable-axis) quantum number.
    pub n: usize,
    /// Transverse phase coefficient for this passing class.
    pub w_n: T,
    /// Frame axis of the longitudinal oscillation.
    pub stable_axis: usize,
    /// Transverse extent where the cosine factor is nonnegative.
    pub validity_halfwidth: T,
    /// Value the density is scaled to at its reference point
    /// (origin for even `n`, profile maximum for odd `n`).
    scale: T,
}

impl<T: Real> ScarDensityModel<T> {
    /// Build the model for longitudinal quantum number `n` and transverse
    /// coefficient `w_n` (from the monodromy or its closed form).
    pub fn new(frame: SaddleFrame<T>, stable_axis: usize, n: usize, w_n: T) -> Result<Self> {
        if w_n <= T::zero() {
            return Err(Error::Parameter("transverse coefficient must be positive".into()));
        }
        let halfwidth = transverse_first_node(w_n, frame.hbar)?;
        let mut model = ScarDensityModel {
            frame,
            n,
            w_n,
            stable_axis,
            validity_halfwidth: halfwidth,
            scale: T::one(),
        };
        // normalization convention: value 1 at the origin for even n,
        // maximum 1 along the longitudinal profile for odd n
        let reference = if n % 2 == 0 {
            model.raw_density(T::zero(), T::zero())?
        } else {
            let omega = model.frame.omega(stable_axis)?;
            let ell = (model.frame.hbar / (model.frame.masses[stable_axis] * omega)).sqrt();
            let mut best = T::zero();
            let samples = 400 * (n + 1);
            let reach = ell * T::of((2.0 * (n as f64) + 4.0).sqrt());
            for i in 0..=samples {
                let x1 = reach * (T::of(2.0) * T::of(i as f64) / T::of(samples as f64) - T::one());
                let v = model.raw_density(x1, T::zero())?;
                if v > best {
                    best = v;
                }
            }
            best
        };
        if reference <= T::zero() {
            return Err(Error::Numeric("degenerate normalization reference".into()));
        }
        model.scale = T::one() / reference;
        Ok(model)
    }

    fn raw_density(&self, x1: T, x2: T) -> Result<T> {
        let psi = longitudinal_wavefunction(&self.frame, self.stable_axis, self.n, x1)?;
        let factor = transverse_scar_factor(self.w_n, self.frame.hbar, x2);
        Ok(factor.max(T::zero()) * psi * psi)
    }

    /// Density at frame coordinates `(x1, x2)`; errors outside the
    /// transverse validity tube.
    pub fn density(&self, x1: T, x2: T) -> Result<T> {
        if x2.abs() > self.validity_halfwidth * (T::one() + T::of(1e-12)) {
            return Err(Error::Validity(format!(
                "|x2| = {} outside the modeled tube halfwidth {}",
                x2.abs().as_f64(),
                self.validity_halfwidth.as_f64()
            )));
        }
        Ok(self.raw_density(x1, x2)? * self.scale)
    }

    /// Density at an ambient-space point, mapped through the frame.
    pub fn density_ambient(&self, x: &DVector<T>) -> Result<T> {
        let local = self.frame.axes.transpose() * (x - &self.frame.origin);
        let mut x2 = T::zero();
        for a in 0..local.len() {
            if a != self.stable_axis {
                x2 += local[a] * local[a];
            }
        }
        self.density(local[self.stable_axis], x2.sqrt())
    }
}

/// Kernel shape for the energy smoothing of the local density of states.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SmoothingKernel {
    Lorentzian,
    Gaussian,
}

/// Energy-smoothed local density of states built from an exact spectrum:
/// the imaginary part of the averaged resolvent, with the principal-value
/// part dropped.
#[derive(Debug, Clone)]
pub struct SmoothedGreen<T> {
    /// Levels paired with the probability density of their eigenstate at
    /// the evaluation points.
    pub spectrum: Vec<(T, Vec<T>)>,
    pub smoothing_width: T,
    pub kernel: SmoothingKernel,
}

impl<T: Real> SmoothedGreen<T> {
    pub fn new(spectrum: Vec<(T, Vec<T>)>, smoothing_width: T, kernel: SmoothingKernel) -> Result<Self> {
        if smoothing_width <= T::zero() {
            return Err(Error::Parameter("smoothing width must be positive".into()));
        }
        if spectrum.is_empty() {
            return Err(Error::Parameter("spectrum must be nonempty".into()));
        }
        Ok(SmoothedGreen {
            spectrum,
            smoothing_width,
            kernel,
        })
    }

    /// Normalized kernel value `K(e)`.
    pub fn kernel_value(&self, e: T) -> T {
        let w = self.smoothing_width;
        match self.kernel {
            SmoothingKernel::Lorentzian => w / (T::pi() * (e * e + w * w)),
            SmoothingKernel::Gaussian => {
                (-(e * e) / (T::of(2.0) * w * w)).exp() / (w * (T::two_pi()).sqrt())
            }
        }
    }

    /// Analytic integral of the kernel over `(-inf, e]`, for sum rules.
    pub fn kernel_cdf(&self, e: T) -> T {
        let w = self.smoothing_width;
        match self.kernel {
            SmoothingKernel::Lorentzian => {
                T::of(0.5) + (e / w).atan() / T::pi()
            }
            SmoothingKernel::Gaussian => {
                // erf via the complementary error-function series is
                // overkill here; use the stable rational approximation
                T::of(0.5) * (T::one() + erf_approx(e / (w * T::of(2.0).sqrt())))
            }
        }
    }

    /// Smoothed density `sum_n |Psi_n(x_j)|^2 K(E0 - E_n)` at evaluation
    /// point `j`.
    pub fn density(&self, e0: T, point: usize) -> Result<T> {
        let mut acc = T::zero();
        for (en, dens) in &self.spectrum {
            let d = *dens.get(point).ok_or_else(|| {
                Error::Parameter(format!("evaluation point {point} out of range"))
            })?;
            acc += d * self.kernel_value(e0 - *en);
        }
        Ok(acc)
    }
}

/// `erf(x)` by the Abramowitz–Stegun 7.1.26 rational approximation
/// (absolute error below 1.5e-7, ample for smoothing-kernel sum rules).
fn erf_approx<T: Real>(x: T) -> T {
    let sign = if x < T::zero() { -T::one() } else { T::one() };
    let x = x.abs();
    let t = T::one() / (T::one() + T::of(0.3275911) * x);
    let poly = t
        * (T::of(0.254829592)
            + t * (T::of(-0.284496736)
                + t * (T::of(1.421413741)
                    + t * (T::of(-1.453152027) + t * T::of(1.061405429)))));
    sign * (T::one() - poly * (-x * x).exp())
}

/// Truncated sum over multiple passings of the primitive orbit.
#[derive(Debug, Clone)]
pub struct PassingSum<T> {
    /// Single-pass transverse coefficients (theta and the prefactor).
    pub coefficients: TransverseCoefficients<T>,
    /// Primitive-orbit action at the working energy.
    pub action: T,
    /// Maslov parameter entering the phase `-pi nu n / 2`.
    pub nu: i32,
    pub hbar: T,
    /// Number of passings retained.
    pub n_max: usize,
}

/// Result of evaluating a [`PassingSum`]: the partial sum and the
/// magnitude of the last retained term as a truncation certificate.
#[derive(Debug, Clone)]
pub struct PassingSumValue<T> {
    pub sum: Complex<T>,
    pub terms: Vec<Complex<T>>,
    pub last_term_magnitude: T,
}

/// Evaluate the passing sum at transverse offset `x2`:
/// `sum_{n=1}^{N} (2 m |sigma|)^{1/4} sinh^{-1/2}(n theta)
///  exp{(i/hbar)(n S + W_n x2^2 / 2) - i pi nu n / 2}`.
pub fn passing_sum<T: Real>(ps: &PassingSum<T>, x2: T) -> Result<PassingSumValue<T>> {
    if ps.n_max == 0 {
        return Err(Error::Parameter("need at least one passing".into()));
    }
    if ps.coefficients.theta <= T::zero() {
        return Err(Error::Parameter("instability exponent must be positive".into()));
    }
    let pref = ps
        .coefficients
        .prefactor
        .ok_or_else(|| Error::Parameter("passing sum needs a scalar transverse direction".into()))?;
    let amp_scale = pref.sqrt();
    let mut terms = Vec::with_capacity(ps.n_max);
    let (mut sum_re, mut sum_im) = (T::zero(), T::zero());
    let mut last = T::zero();
    for n in 1..=ps.n_max {
        let (_, w_n) = multi_pass_coefficients(&ps.coefficients, n)?;
        let nf = T::of(n as f64);
        let mag = amp_scale / (nf * ps.coefficients.theta).sinh().sqrt();
        let phase = (nf * ps.action + w_n * x2 * x2 * T::of(0.5)) / ps.hbar
            - T::pi() * T::of(ps.nu as f64) * nf * T::of(0.5);
        let term = Complex::new(mag * phase.cos(), mag * phase.sin());
        sum_re += term.re;
        sum_im += term.im;
        last = mag;
        terms.push(term);
    }
    Ok(PassingSumValue {
        sum: Complex::new(sum_re, sum_im),
        terms,
        last_term_magnitude: last,
    })
}

/// Scar-energy rule: `E = V_saddle + E_loc + (n + 1/2) hbar omega1` when
/// the frame has a stable axis, and `V_saddle + E_loc` otherwise (pure
/// maximum, no longitudinal oscillator).
pub fn scar_energy_estimate<T: Real>(frame: &SaddleFrame<T>, n: usize, e_loc: T) -> Result<T> {
    if e_loc < T::zero() {
        return Err(Error::Parameter("localization energy must be nonnegative".into()));
    }
    let stable = frame.stable_axes();
    let base = frame.v_saddle + e_loc;
    match stable.first() {
        None => Ok(base),
        Some(&axis) => {
            let omega = frame.omega(axis)?;
            Ok(base + (T::of(n as f64) + T::of(0.5)) * frame.hbar * omega)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::critical::find_critical_point;
    use crate::dynamics::analytic_saddle_coefficients;
    use crate::potential::PotentialField;
    use approx::assert_relative_eq;

    fn frame_2d(s_stable: f64, s_unstable: f64) -> SaddleFrame<f64> {
        let p = PotentialField::quadratic_saddle(&[s_stable, s_unstable]);
        let cp = find_critical_point(&p, &DVector::zeros(2), 1e-12).unwrap();
        SaddleFrame::from_critical_point(&p, &cp, &[1.0, 1.0], 1.0).unwrap()
    }

    #[test]
    fn transverse_factor_endpoints() {
        assert_eq!(transverse_scar_factor(3.0, 1.0, 0.0), 1.0);
        let w0 = 2.0 * 50.0f64.sqrt();
        let node = transverse_first_node(w0, 1.0).unwrap();
        assert_relative_eq!(node, 0.4713, epsilon = 1e-4);
        assert!(transverse_scar_factor(w0, 1.0, node).abs() < 1e-12);
    }

    #[test]
    fn hermite_functions_are_orthonormal() {
        // quadrature oracle on a wide uniform grid
        let a = 1.7;
        let (lo, hi, n_pts) = (-12.0, 12.0, 6001);
        let h = (hi - lo) / (n_pts - 1) as f64;
        for m in 0..6usize {
            for n in 0..6usize {
                let mut acc = 0.0;
                for i in 0..n_pts {
                    let x = lo + h * i as f64;
                    let w = if i == 0 || i == n_pts - 1 { 0.5 } else { 1.0 };
                    acc += w
                        * hermite_function(m, a, x).unwrap()
                        * hermite_function(n, a, x).unwrap();
                }
                acc *= h;
                let expect = if m == n { 1.0 } else { 0.0 };
                assert!((acc - expect).abs() < 1e-8, "({m},{n}) -> {acc}");
            }
        }
    }

    #[test]
    fn ground_state_value_and_odd_node() {
        let frame = frame_2d(1.0, -1.0);
        // stable axis = 1 (ascending eigenvalues), omega = sqrt(2)
        let omega = 2.0f64.sqrt();
        let at0 = longitudinal_wavefunction(&frame, 1, 0, 0.0).unwrap();
        assert_relative_eq!(at0, (omega / std::f64::consts::PI).powf(0.25), epsilon = 1e-12);
        assert_eq!(longitudinal_wavefunction(&frame, 1, 1, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn density_model_clamps_and_normalizes() {
        let frame = frame_2d(1.0, -1.0);
        let c = analytic_saddle_coefficients(&frame, 1, 0).unwrap();
        let model = ScarDensityModel::new(frame, 1, 0, c.w_scalar()).unwrap();
        // even n: value 1 at the origin
        assert_relative_eq!(model.density(0.0, 0.0).unwrap(), 1.0, epsilon = 1e-12);
        // node of the transverse factor
        let node = model.validity_halfwidth;
        assert!(model.density(0.0, node).unwrap().abs() < 1e-10);
        // outside the tube: validity error
        assert!(matches!(
            model.density(0.0, node * 1.5),
            Err(Error::Validity(_))
        ));
        // parity in x2 and longitudinal parity for even n
        for (x1, x2) in [(0.3, 0.1), (0.7, 0.3)] {
            assert_relative_eq!(
                model.density(x1, x2).unwrap(),
                model.density(-x1, -x2).unwrap(),
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn odd_model_peaks_at_one() {
        let frame = frame_2d(1.0, -1.0);
        let c = analytic_saddle_coefficients(&frame, 1, 0).unwrap();
        let model = ScarDensityModel::new(frame, 1, 1, c.w_scalar()).unwrap();
        assert_eq!(model.density(0.0, 0.0).unwrap(), 0.0);
        let mut best: f64 = 0.0;
        for i in 0..4000 {
            let x1 = -4.0 + 8.0 * i as f64 / 3999.0;
            best = best.max(model.density(x1, 0.0).unwrap());
        }
        assert_relative_eq!(best, 1.0, epsilon = 1e-4);
    }

    #[test]
    fn tube_integral_matches_quadrature_oracle() {
        // integral over the tube = scale * int |psi|^2 dx1 * int_{-node}^{node} cos
        // with int cos(W x^2/2) dx expressible through Fresnel C; use a direct
        // 2D quadrature against a 1D quadrature of the factorized form instead
        let frame = frame_2d(1.0, -1.0);
        let c = analytic_saddle_coefficients(&frame, 1, 0).unwrap();
        let model = ScarDensityModel::new(frame, 1, 0, c.w_scalar()).unwrap();
        let node = model.validity_halfwidth;
        let (n1, n2) = (801, 801);
        let (a1, b1) = (-6.0, 6.0);
        let h1 = (b1 - a1) / (n1 - 1) as f64;
        let h2 = 2.0 * node / (n2 - 1) as f64;
        let mut acc2d = 0.0;
        for i in 0..n1 {
            let x1 = a1 + h1 * i as f64;
            let w1 = if i == 0 || i == n1 - 1 { 0.5 } else { 1.0 };
            for j in 0..n2 {
                let x2 = -node + h2 * j as f64;
                let w2 = if j == 0 || j == n2 - 1 { 0.5 } else { 1.0 };
                acc2d += w1 * w2 * model.density(x1, x2).unwrap();
            }
        }
        acc2d *= h1 * h2;
        // factorized oracle
        let mut long = 0.0;
        for i in 0..n1 {
            let x1 = a1 + h1 * i as f64;
            let w1 = if i == 0 || i == n1 - 1 { 0.5 } else { 1.0 };
            let psi = longitudinal_wavefunction(&model.frame, 1, 0, x1).unwrap();
            long += w1 * psi * psi;
        }
        long *= h1;
        let mut trans = 0.0;
        for j in 0..n2 {
            let x2 = -node + h2 * j as f64;
            let w2 = if j == 0 || j == n2 - 1 { 0.5 } else { 1.0 };
            trans += w2 * transverse_scar_factor(c.w_scalar(), 1.0, x2);
        }
        trans *= h2;
        let psi0 = longitudinal_wavefunction(&model.frame, 1, 0, 0.0).unwrap();
        let oracle = long * trans / (psi0 * psi0);
        assert_relative_eq!(acc2d, oracle, max_relative = 1e-6);
    }

    #[test]
    fn smoothed_green_single_level_and_sum_rule() {
        let sg = SmoothedGreen::new(
            vec![(2.0, vec![0.7])],
            0.1,
            SmoothingKernel::Lorentzian,
        )
        .unwrap();
        assert_relative_eq!(
            sg.density(2.0, 0).unwrap(),
            0.7 / (std::f64::consts::PI * 0.1),
            epsilon = 1e-12
        );
        // sum rule: integral over E of the smoothed density = sum of local
        // densities, via the analytic kernel CDF over a wide window
        for kernel in [SmoothingKernel::Lorentzian, SmoothingKernel::Gaussian] {
            let sg = SmoothedGreen::new(
                vec![(1.0, vec![0.3]), (1.5, vec![0.4]), (3.0, vec![0.2])],
                0.05,
                kernel,
            )
            .unwrap();
            let (lo, hi) = (-1e4, 1e4);
            let mut mass = 0.0;
            for (en, dens) in &sg.spectrum {
                mass += dens[0] * (sg.kernel_cdf(hi - en) - sg.kernel_cdf(lo - en));
            }
            assert_relative_eq!(mass, 0.9, max_relative = 1e-4);
        }
    }

    #[test]
    fn two_level_contamination_bound() {
        let sg = SmoothedGreen::new(
            vec![(0.0, vec![1.0]), (1.0, vec![1.0])],
            0.02,
            SmoothingKernel::Lorentzian,
        )
        .unwrap();
        let on_level = sg.density(0.0, 0).unwrap();
        let k0 = sg.kernel_value(0.0);
        let contamination = on_level - k0;
        assert!(contamination <= sg.kernel_value(1.0) + 1e-15);
        assert!(contamination / k0 < 1e-3);
    }

    #[test]
    fn passing_sum_terms_decay_and_match_ratio_oracle() {
        let frame = frame_2d(1.0, -1.0);
        let c = analytic_saddle_coefficients(&frame, 1, 0).unwrap();
        let ps = PassingSum {
            coefficients: c.clone(),
            action: 0.0,
            nu: 0,
            hbar: 1.0,
            n_max: 4,
        };
        let v = passing_sum(&ps, 0.0).unwrap();
        // phases vanish: every term real positive, magnitudes decreasing
        let mut prev = f64::INFINITY;
        for t in &v.terms {
            assert!(t.im.abs() < 1e-12);
            assert!(t.re > 0.0 && t.re < prev);
            prev = t.re;
        }
        // theta = 2 pi: weight ratio of n=2 to n=1 is sqrt(sinh 2pi / sinh 4pi)
        let th = c.theta;
        let oracle = (th.sinh() / (2.0 * th).sinh()).sqrt();
        assert_relative_eq!(v.terms[1].re / v.terms[0].re, oracle, max_relative = 1e-12);
        assert_relative_eq!(oracle, (-std::f64::consts::PI).exp(), max_relative = 1e-3);
        assert_relative_eq!(v.last_term_magnitude, v.terms[3].re, epsilon = 1e-15);
        // single-term sum is the primitive orbit contribution
        let ps1 = PassingSum { n_max: 1, ..ps };
        let v1 = passing_sum(&ps1, 0.3).unwrap();
        assert_eq!(v1.terms.len(), 1);
        assert_relative_eq!(v1.sum.re, v1.terms[0].re, epsilon = 1e-15);
    }

    #[test]
    fn factorization_bound_for_large_theta() {
        // theta >= 5: the tail beyond the primitive term is bounded by
        // 2 sinh^{-1/2}(2 theta) / sinh^{-1/2}(theta) relative to term 1
        let frame = frame_2d(0.1, -1.0);
        let c = analytic_saddle_coefficients(&frame, 1, 0).unwrap();
        assert!(c.theta >= 5.0);
        let ps = PassingSum {
            coefficients: c.clone(),
            action: 0.7,
            nu: 0,
            hbar: 1.0,
            n_max: 12,
        };
        let node = transverse_first_node(c.w_scalar(), 1.0).unwrap();
        for k in 0..=10 {
            let x2 = node * k as f64 / 10.0;
            let v = passing_sum(&ps, x2).unwrap();
            let t1 = v.terms[0];
            let rest = (v.sum - t1).norm_sqr().sqrt();
            let bound =
                2.0 * (2.0 * c.theta).sinh().powf(-0.5) / c.theta.sinh().powf(-0.5);
            assert!(rest / t1.norm_sqr().sqrt() <= bound);
        }
    }

    #[test]
    fn energy_rule_ladder_and_maximum_case() {
        let frame = frame_2d(1.0, -1.0);
        let e0 = scar_energy_estimate(&frame, 0, 0.25).unwrap();
        let e1 = scar_energy_estimate(&frame, 1, 0.25).unwrap();
        let omega1 = 2.0f64.sqrt();
        assert_relative_eq!(e0, 0.25 + 0.5 * omega1, epsilon = 1e-12);
        assert_relative_eq!(e1 - e0, omega1, epsilon = 1e-12);
        assert!(scar_energy_estimate(&frame, 0, -0.1).is_err());
        // pure maximum (no stable axis): base plus localization energy only
        let p = PotentialField::cosine(50.0);
        let cp = find_critical_point(&p, &DVector::from_row_slice(&[0.1]), 1e-12).unwrap();
        let frame = crate::critical::SaddleFrame::transverse_at_maximum(&p, &cp, &[0.5], 1.0)
            .unwrap();
        let e = scar_energy_estimate(&frame, 0, 1.189).unwrap();
        assert_relative_eq!(e, 100.0 + 1.189, epsilon = 1e-9);
    }
}
