//! Scar quantification: correlation ranking of eigenstates against the
//! predicted density, resurgence/peak analysis of autocorrelation
//! records, smoothed level densities, and the 1D exact-vs-model density
//! comparison dataset.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::quantum::{SpectralWeights, Spectrum1D, Spectrum2D};
use crate::scalar::Real;
use crate::scar::{transverse_scar_factor, ScarDensityModel, SmoothedGreen, SmoothingKernel};

/// Correlation of one eigenstate with the scar model over the tube.
#[derive(Debug, Clone)]
pub struct ScarScore<T> {
    pub state_index: usize,
    pub energy: T,
    /// Pearson correlation in [-1, 1].
    pub score: T,
}

/// Tube in saddle-frame coordinates over which densities are compared.
#[derive(Debug, Clone)]
pub struct Tube<T> {
    /// Longitudinal half-extent.
    pub x1_halfwidth: T,
    /// Transverse half-extent.
    pub x2_halfwidth: T,
}

/// Default tube of a model: transverse first node, longitudinal
/// classical turning point plus two oscillator widths.
pub fn default_tube<T: Real>(model: &ScarDensityModel<T>) -> Result<Tube<T>> {
    let omega = model.frame.omega(model.stable_axis)?;
    let m = model.frame.masses[model.stable_axis];
    let ell = (model.frame.hbar / (m * omega)).sqrt();
    let turning = ell * T::of(2.0 * model.n as f64 + 1.0).sqrt();
    Ok(Tube {
        x1_halfwidth: turning + T::of(2.0) * ell,
        x2_halfwidth: model.validity_halfwidth,
    })
}

fn pearson<T: Real>(a: &[T], b: &[T]) -> Result<T> {
    let n = a.len();
    if n < 3 || b.len() != n {
        return Err(Error::Geometry("too few paired samples for correlation".into()));
    }
    let nf = T::of(n as f64);
    let ma = a.iter().fold(T::zero(), |s, &v| s + v) / nf;
    let mb = b.iter().fold(T::zero(), |s, &v| s + v) / nf;
    let (mut cov, mut va, mut vb) = (T::zero(), T::zero(), T::zero());
    for (&x, &y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        cov += dx * dy;
        va += dx * dx;
        vb += dy * dy;
    }
    if va <= T::zero() || vb <= T::zero() {
        return Err(Error::Numeric("zero-variance density over the tube".into()));
    }
    Ok(cov / (va * vb).sqrt())
}

/// Rank all states of a 2D spectrum by correlation with the model
/// density over the tube, descending.
pub fn scar_rank<T: Real>(
    spectrum: &Spectrum2D<T>,
    model: &ScarDensityModel<T>,
    tube: &Tube<T>,
) -> Result<Vec<ScarScore<T>>> {
    // indices of grid points inside the tube, with the model density there
    let xs1 = spectrum.grid.xs1();
    let xs2 = spectrum.grid.xs2();
    let n1 = spectrum.grid.n[0];
    let mut idx = Vec::new();
    let mut model_vals = Vec::new();
    for (j2, &x2) in xs2.iter().enumerate() {
        for (j1, &x1) in xs1.iter().enumerate() {
            let point = DVector::from_row_slice(&[x1, x2]);
            let local = model.frame.axes.transpose() * (&point - &model.frame.origin);
            let (mut y1, mut y2sq) = (T::zero(), T::zero());
            for a in 0..local.len() {
                if a == model.stable_axis {
                    y1 = local[a];
                } else {
                    y2sq += local[a] * local[a];
                }
            }
            let y2 = y2sq.sqrt();
            if y1.abs() <= tube.x1_halfwidth && y2 <= tube.x2_halfwidth {
                idx.push(j2 * n1 + j1);
                model_vals.push(model.density(y1, y2)?);
            }
        }
    }
    if idx.len() < 8 {
        return Err(Error::Geometry(
            "tube intersects too few grid points of the spectrum".into(),
        ));
    }
    let mut scores = Vec::with_capacity(spectrum.eigenvalues.len());
    for (s, v) in spectrum.eigenvectors.iter().enumerate() {
        let exact: Vec<T> = idx.iter().map(|&i| v[i] * v[i]).collect();
        scores.push(ScarScore {
            state_index: s,
            energy: spectrum.eigenvalues[s],
            score: pearson(&exact, &model_vals)?,
        });
    }
    scores.sort_by(|a, b| b.score.partial_cmp(&a.score).unwrap());
    Ok(scores)
}

/// One detected peak of a sampled nonnegative signal.
#[derive(Debug, Clone)]
pub struct Peak<T> {
    pub position: T,
    pub height: T,
    /// Full width at half maximum, by linear interpolation.
    pub width: T,
    /// Integral of the signal between the flanking local minima.
    pub mass: T,
}

/// Local maxima above `median + 3 * median absolute deviation`, with
/// parabolic position refinement and half-maximum widths.
pub fn detect_peaks<T: Real>(xs: &[T], ys: &[T]) -> Result<Vec<Peak<T>>> {
    let n = xs.len();
    if n < 8 || ys.len() != n {
        return Err(Error::Parameter("need at least 8 matching samples".into()));
    }
    let mut sorted: Vec<T> = ys.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = sorted[n / 2];
    let mut dev: Vec<T> = ys.iter().map(|&y| (y - median).abs()).collect();
    dev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mad = dev[n / 2];
    let threshold = median + T::of(3.0) * mad;
    let mut peaks = Vec::new();
    for i in 1..n - 1 {
        if !(ys[i] > threshold && ys[i] >= ys[i - 1] && ys[i] > ys[i + 1]) {
            continue;
        }
        // parabolic refinement around the sample maximum
        let (ym, y0, yp) = (ys[i - 1], ys[i], ys[i + 1]);
        let denom = ym - T::of(2.0) * y0 + yp;
        let frac = if denom.abs() > T::of(1e-300) {
            (T::of(0.5) * (ym - yp) / denom).max(-T::of(0.5)).min(T::of(0.5))
        } else {
            T::zero()
        };
        let dx = xs[i + 1] - xs[i];
        let position = xs[i] + frac * dx;
        let height = y0 - T::of(0.25) * (ym - yp) * frac;
        // half-maximum crossings
        let half = height * T::of(0.5);
        let mut left = xs[0];
        let mut j = i;
        while j > 0 {
            if ys[j - 1] <= half {
                let t = (ys[j] - half) / (ys[j] - ys[j - 1]);
                left = xs[j] - t * (xs[j] - xs[j - 1]);
                break;
            }
            j -= 1;
        }
        let mut right = xs[n - 1];
        let mut j = i;
        while j + 1 < n {
            if ys[j + 1] <= half {
                let t = (ys[j] - half) / (ys[j] - ys[j + 1]);
                right = xs[j] + t * (xs[j + 1] - xs[j]);
                break;
            }
            j += 1;
        }
        // integral between flanking local minima
        let mut lo = i;
        while lo > 0 && ys[lo - 1] < ys[lo] {
            lo -= 1;
        }
        let mut hi = i;
        while hi + 1 < n && ys[hi + 1] < ys[hi] {
            hi += 1;
        }
        let mut mass = T::zero();
        for k in lo..hi {
            mass += (ys[k] + ys[k + 1]) * T::of(0.5) * (xs[k + 1] - xs[k]);
        }
        peaks.push(Peak {
            position,
            height,
            width: right - left,
            mass,
        });
    }
    Ok(peaks)
}

/// Resurgence and spectral peak structure of an autocorrelation record.
#[derive(Debug, Clone)]
pub struct PeakAnalysis<T> {
    /// Resurgence peaks of `|C(t)|`, ascending in time (the trivial
    /// `t = 0` peak included).
    pub time_peaks: Vec<Peak<T>>,
    /// Fitted slope of `ln |C|` across the peak heights; the model decay
    /// is `-lambda / 2` per unit time.
    pub decay_rate: T,
    /// Peaks of `S(E)`, ascending in energy.
    pub energy_peaks: Vec<Peak<T>>,
    /// Mean spacing of adjacent `S(E)` peaks.
    pub mean_energy_spacing: T,
}

/// Locate `|C(t)|` resurgences and `S(E)` peaks and fit the inter-peak
/// decay. Requires at least three resolvable time peaks.
pub fn peak_and_decay_analysis<T: Real>(
    times: &[T],
    c_abs: &[T],
    weights: &SpectralWeights<T>,
) -> Result<PeakAnalysis<T>> {
    let mut time_peaks = detect_peaks(times, c_abs)?;
    // the record starts on the t = 0 maximum, which the interior-point
    // scan cannot see; add it explicitly when it dominates its vicinity
    if !c_abs.is_empty() && c_abs[0] > c_abs[1] {
        let mut k = 0;
        while k + 1 < c_abs.len() && c_abs[k + 1] < c_abs[k] {
            k += 1;
        }
        let mut mass = T::zero();
        for i in 0..k {
            mass += (c_abs[i] + c_abs[i + 1]) * T::of(0.5) * (times[i + 1] - times[i]);
        }
        let half = c_abs[0] * T::of(0.5);
        let mut right = times[c_abs.len() - 1];
        for i in 0..c_abs.len() - 1 {
            if c_abs[i + 1] <= half {
                let t = (c_abs[i] - half) / (c_abs[i] - c_abs[i + 1]);
                right = times[i] + t * (times[i + 1] - times[i]);
                break;
            }
        }
        time_peaks.insert(
            0,
            Peak {
                position: times[0],
                height: c_abs[0],
                width: (right - times[0]) * T::of(2.0),
                mass,
            },
        );
    }
    if time_peaks.len() < 3 {
        return Err(Error::InsufficientSignal(format!(
            "only {} resurgence peaks above the noise floor",
            time_peaks.len()
        )));
    }
    // least-squares slope of ln(height) vs position
    let nf = T::of(time_peaks.len() as f64);
    let (mut sx, mut sy, mut sxx, mut sxy) = (T::zero(), T::zero(), T::zero(), T::zero());
    for p in &time_peaks {
        let y = p.height.ln();
        sx += p.position;
        sy += y;
        sxx += p.position * p.position;
        sxy += p.position * y;
    }
    let decay_rate = (nf * sxy - sx * sy) / (nf * sxx - sx * sx);
    let energy_peaks = detect_peaks(&weights.energies, &weights.s_values)?;
    if energy_peaks.len() < 2 {
        return Err(Error::InsufficientSignal(
            "fewer than two spectral peaks".into(),
        ));
    }
    let mut spacing_sum = T::zero();
    for w in energy_peaks.windows(2) {
        spacing_sum += w[1].position - w[0].position;
    }
    let mean_energy_spacing = spacing_sum / T::of((energy_peaks.len() - 1) as f64);
    Ok(PeakAnalysis {
        time_peaks,
        decay_rate,
        energy_peaks,
        mean_energy_spacing,
    })
}

/// Kernel-smoothed level counting density built on the same kernels as
/// the smoothed Green's function.
#[derive(Debug, Clone)]
pub struct LevelDensity<T> {
    smoother: SmoothedGreen<T>,
}

impl<T: Real> LevelDensity<T> {
    pub fn new(levels: &[T], smoothing_width: T, kernel: SmoothingKernel) -> Result<Self> {
        if levels.len() < 10 {
            return Err(Error::Parameter("need at least 10 levels".into()));
        }
        let spectrum = levels.iter().map(|&e| (e, vec![T::one()])).collect();
        Ok(LevelDensity {
            smoother: SmoothedGreen::new(spectrum, smoothing_width, kernel)?,
        })
    }

    /// `d(E) = sum_n K(E - E_n)`.
    pub fn density(&self, e: T) -> T {
        self.smoother
            .spectrum
            .iter()
            .fold(T::zero(), |acc, (en, _)| acc + self.smoother.kernel_value(e - *en))
    }

    /// Analytic integral of `d` over `[lo, hi]`; equals the level count
    /// when the window is wide.
    pub fn integrated_count(&self, lo: T, hi: T) -> T {
        self.smoother.spectrum.iter().fold(T::zero(), |acc, (en, _)| {
            acc + self.smoother.kernel_cdf(hi - *en) - self.smoother.kernel_cdf(lo - *en)
        })
    }
}

/// Paired exact/model density samples for the 1D comparison, restricted
/// to the validity clamp of the transverse model.
#[derive(Debug, Clone)]
pub struct DensityComparison<T> {
    pub selected_index: usize,
    pub selected_energy: T,
    /// `(x, exact density, rescaled model density)` on the clamp region.
    pub rows: Vec<(T, T, T)>,
    /// Maximum relative deviation on `|x| <=` half the first node.
    pub max_rel_dev: T,
    /// Mean relative deviation on the same region.
    pub mean_rel_dev: T,
}

/// Compare the exact 1D density of the eigenstate nearest
/// `target_energy` (within `energy_window`, density maximal at x = 0)
/// against `cos(W x^2 / 2 hbar)` rescaled to match at x = 0.
pub fn density_comparison_1d<T: Real>(
    spectrum: &Spectrum1D<T>,
    w_coeff: T,
    hbar: T,
    target_energy: T,
    energy_window: T,
    n_grid: usize,
) -> Result<DensityComparison<T>> {
    if w_coeff <= T::zero() || hbar <= T::zero() {
        return Err(Error::Parameter("need W > 0 and hbar > 0".into()));
    }
    // candidates within the window, nearest first
    let mut candidates: Vec<usize> = (0..spectrum.eigenvalues.len())
        .filter(|&i| (spectrum.eigenvalues[i] - target_energy).abs() <= energy_window)
        .collect();
    if candidates.is_empty() {
        return Err(Error::Selection(format!(
            "no eigenstate within {:e} of the target energy {:e}",
            energy_window.as_f64(),
            target_energy.as_f64()
        )));
    }
    candidates.sort_by(|&a, &b| {
        (spectrum.eigenvalues[a] - target_energy)
            .abs()
            .partial_cmp(&(spectrum.eigenvalues[b] - target_energy).abs())
            .unwrap()
    });
    let node = (T::pi() * hbar / w_coeff).sqrt();
    let mut chosen = None;
    for &cand in &candidates {
        let (xs, dens) = spectrum.density_on_grid(cand, n_grid)?;
        // density must be maximal at x = 0 (the saddle-ridge point)
        let (imax, _) = dens
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap();
        if xs[imax].abs() <= T::pi() / T::of(n_grid as f64) * T::of(1.5) {
            chosen = Some((cand, xs, dens));
            break;
        }
    }
    let (selected_index, xs, dens) = chosen.ok_or_else(|| {
        Error::Selection(
            "no candidate eigenstate has its density maximum at the ridge point".into(),
        )
    })?;
    // exact density at x = 0 fixes the model scale
    let (i0, _) = xs
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.abs().partial_cmp(&b.1.abs()).unwrap())
        .unwrap();
    let exact0 = dens[i0];
    if exact0 <= T::zero() {
        return Err(Error::Selection("vanishing exact density at the ridge point".into()));
    }
    let mut rows = Vec::new();
    let half_node = node * T::of(0.5);
    let (mut dev_sum, mut dev_max, mut count) = (T::zero(), T::zero(), 0usize);
    for (&x, &d) in xs.iter().zip(&dens) {
        if x.abs() > node {
            continue;
        }
        let model = exact0 * transverse_scar_factor(w_coeff, hbar, x).max(T::zero());
        rows.push((x, d, model));
        if x.abs() <= half_node {
            let dev = (d - model).abs() / d;
            dev_sum += dev;
            if dev > dev_max {
                dev_max = dev;
            }
            count += 1;
        }
    }
    if count == 0 {
        return Err(Error::Resolution("no grid points inside the half-node region".into()));
    }
    Ok(DensityComparison {
        selected_index,
        selected_energy: spectrum.eigenvalues[selected_index],
        rows,
        max_rel_dev: dev_max,
        mean_rel_dev: dev_sum / T::of(count as f64),
    })
}

/// Localization energy of a state concentrated at the barrier top: the
/// lowest level above the saddle energy of the 1D Dirichlet problem
/// along the unstable axis, with the potential measured relative to the
/// saddle value. `lo..hi` is the transverse extent of the solver box and
/// `n` its interior point count.
pub fn transverse_localization_energy<T: Real>(
    potential: &crate::potential::PotentialField<T>,
    frame: &crate::critical::SaddleFrame<T>,
    unstable_axis: usize,
    lo: T,
    hi: T,
    n: usize,
) -> Result<T> {
    if frame.sigmas[unstable_axis] >= T::zero() {
        return Err(Error::NotASaddle(format!(
            "axis {unstable_axis} is not unstable"
        )));
    }
    let h = (hi - lo) / T::of((n + 1) as f64);
    let axis = frame.axes.column(unstable_axis).clone_owned();
    let mut samples = Vec::with_capacity(n);
    for j in 0..n {
        let x2 = lo + h * T::of((j + 1) as f64);
        let point = &frame.origin + &axis * x2;
        samples.push(potential.value(&point)? - frame.v_saddle);
    }
    let mass = frame.masses[unstable_axis];
    let (levels, _, _) = crate::quantum::solve_dirichlet_1d(mass, frame.hbar, &samples, lo, hi)?;
    levels
        .into_iter()
        .find(|&e| e > T::zero())
        .ok_or_else(|| Error::Selection("no transverse level above the saddle energy".into()))
}
