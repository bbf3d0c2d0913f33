//! 2D Dirichlet-box eigensolver: 5-point Laplacian plus diagonal
//! potential, lowest eigenpairs by shift-inverted Lanczos with
//! conjugate-gradient inner solves.

use nalgebra::{DMatrix, DVector};

use crate::critical::symmetric_eigen_sorted;
use crate::error::{Error, Result};
use crate::potential::PotentialField;
use crate::scalar::Real;

/// Rectangular Dirichlet box `[lo1, hi1] x [lo2, hi2]` with `n1 x n2`
/// interior grid points.
#[derive(Debug, Clone)]
pub struct GridBox<T> {
    pub lo: [T; 2],
    pub hi: [T; 2],
    pub n: [usize; 2],
}

impl<T: Real> GridBox<T> {
    pub fn spacing(&self) -> [T; 2] {
        [
            (self.hi[0] - self.lo[0]) / T::of((self.n[0] + 1) as f64),
            (self.hi[1] - self.lo[1]) / T::of((self.n[1] + 1) as f64),
        ]
    }

    /// Interior coordinate of index `j` along axis `axis`.
    pub fn coord(&self, axis: usize, j: usize) -> T {
        self.lo[axis] + self.spacing()[axis] * T::of((j + 1) as f64)
    }

    /// Interior x1 coordinates.
    pub fn xs1(&self) -> Vec<T> {
        (0..self.n[0]).map(|j| self.coord(0, j)).collect()
    }

    /// Interior x2 coordinates.
    pub fn xs2(&self) -> Vec<T> {
        (0..self.n[1]).map(|j| self.coord(1, j)).collect()
    }
}

/// Lowest eigenpairs of the discretized 2D Hamiltonian. Eigenvectors are
/// stored row-major with x1 fastest and normalized under the grid
/// measure `h1 h2`.
#[derive(Debug, Clone)]
pub struct Spectrum2D<T> {
    pub eigenvalues: Vec<T>,
    pub eigenvectors: Vec<DVector<T>>,
    pub grid: GridBox<T>,
    pub masses: [T; 2],
    pub hbar: T,
}

/// Matrix-free application of the 5-point Hamiltonian.
struct GridHamiltonian<T> {
    n1: usize,
    n2: usize,
    /// `hbar^2 / (2 m h^2)` per axis.
    t1: T,
    t2: T,
    /// Potential samples, row-major x1 fastest.
    v: Vec<T>,
}

impl<T: Real> GridHamiltonian<T> {
    fn apply(&self, x: &DVector<T>, out: &mut DVector<T>) {
        let (n1, n2) = (self.n1, self.n2);
        let diag = T::of(2.0) * (self.t1 + self.t2);
        for j2 in 0..n2 {
            let row = j2 * n1;
            for j1 in 0..n1 {
                let i = row + j1;
                let mut acc = (diag + self.v[i]) * x[i];
                if j1 > 0 {
                    acc -= self.t1 * x[i - 1];
                }
                if j1 + 1 < n1 {
                    acc -= self.t1 * x[i + 1];
                }
                if j2 > 0 {
                    acc -= self.t2 * x[i - n1];
                }
                if j2 + 1 < n2 {
                    acc -= self.t2 * x[i + n1];
                }
                out[i] = acc;
            }
        }
    }
}

/// Deterministic pseudo-random stream for the Lanczos start vector.
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn deterministic_start<T: Real>(len: usize, seed: u64) -> DVector<T> {
    let mut state = seed;
    let mut v = DVector::zeros(len);
    for i in 0..len {
        let u = (splitmix64(&mut state) >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        v[i] = T::of(2.0 * u - 1.0);
    }
    let norm = v.norm();
    v / norm
}

/// Preconditioned conjugate gradient for `(H - shift) x = b` with the
/// Jacobi (diagonal) preconditioner.
fn cg_shifted<T: Real>(
    h: &GridHamiltonian<T>,
    shift: T,
    inv_diag: &DVector<T>,
    b: &DVector<T>,
    tol: T,
    max_iter: usize,
) -> Result<DVector<T>> {
    let n = b.len();
    let mut x = DVector::zeros(n);
    let mut r = b.clone();
    let mut z = r.component_mul(inv_diag);
    let mut p = z.clone();
    let mut rz = r.dot(&z);
    let b_norm = b.norm();
    let mut hp = DVector::zeros(n);
    for _ in 0..max_iter {
        h.apply(&p, &mut hp);
        hp.axpy(-shift, &p, T::one());
        let php = p.dot(&hp);
        if php <= T::zero() {
            return Err(Error::Numeric(
                "shifted operator lost positive definiteness in CG".into(),
            ));
        }
        let alpha = rz / php;
        x.axpy(alpha, &p, T::one());
        r.axpy(-alpha, &hp, T::one());
        if r.norm() <= tol * b_norm {
            return Ok(x);
        }
        z = r.component_mul(inv_diag);
        let rz_new = r.dot(&z);
        let beta = rz_new / rz;
        rz = rz_new;
        p = &z + &p * beta;
    }
    Err(Error::NoConvergence(format!(
        "inner CG stalled: relative residual {:e}",
        (r.norm() / b_norm).as_f64()
    )))
}

/// Solve for the lowest `n_levels` eigenpairs of
/// `H = -hbar^2/(2 m1) d^2/dx1^2 - hbar^2/(2 m2) d^2/dx2^2 + V`
/// on the Dirichlet box.
pub fn solve_grid_2d<T: Real>(
    masses: [T; 2],
    hbar: T,
    potential: &PotentialField<T>,
    grid: GridBox<T>,
    n_levels: usize,
) -> Result<Spectrum2D<T>> {
    if grid.n[0] < 16 || grid.n[1] < 16 {
        return Err(Error::Parameter("grid must have at least 16 points per axis".into()));
    }
    if masses.iter().any(|&m| m <= T::zero()) || hbar <= T::zero() {
        return Err(Error::Parameter("masses and hbar must be positive".into()));
    }
    let dof = grid.n[0] * grid.n[1];
    if n_levels == 0 || n_levels > dof / 4 {
        return Err(Error::Parameter(format!(
            "n_levels must be in 1..={}",
            dof / 4
        )));
    }
    let [h1, h2] = grid.spacing();
    let t1 = hbar * hbar / (T::of(2.0) * masses[0] * h1 * h1);
    let t2 = hbar * hbar / (T::of(2.0) * masses[1] * h2 * h2);
    let mut v = Vec::with_capacity(dof);
    let mut v_min = T::of(f64::INFINITY);
    let mut point = DVector::zeros(2);
    for j2 in 0..grid.n[1] {
        point[1] = grid.coord(1, j2);
        for j1 in 0..grid.n[0] {
            point[0] = grid.coord(0, j1);
            let val = potential.value(&point)?;
            if val < v_min {
                v_min = val;
            }
            v.push(val);
        }
    }
    let ham = GridHamiltonian {
        n1: grid.n[0],
        n2: grid.n[1],
        t1,
        t2,
        v,
    };
    // shift just below the spectrum so (H - shift) is positive definite
    // and the lowest levels map to the largest inverse eigenvalues
    let shift = v_min - T::one();
    let mut inv_diag = DVector::zeros(dof);
    let diag_kin = T::of(2.0) * (t1 + t2);
    for i in 0..dof {
        inv_diag[i] = T::one() / (diag_kin + ham.v[i] - shift);
    }
    // Lanczos on (H - shift)^{-1} with full reorthogonalization
    let m = (3 * n_levels + 60).min(dof);
    let cg_tol = T::of(1e-12);
    let cg_max = 50 * ((dof as f64).sqrt() as usize + 1);
    let mut basis: Vec<DVector<T>> = Vec::with_capacity(m);
    let mut alphas: Vec<T> = Vec::with_capacity(m);
    let mut betas: Vec<T> = Vec::with_capacity(m);
    basis.push(deterministic_start(dof, 0x5EED_CAFE_F00D_D00D));
    for j in 0..m {
        let mut w = cg_shifted(&ham, shift, &inv_diag, &basis[j], cg_tol, cg_max)?;
        let alpha = basis[j].dot(&w);
        alphas.push(alpha);
        // full reorthogonalization, twice for stability
        for _ in 0..2 {
            for q in &basis {
                let c = q.dot(&w);
                w.axpy(-c, q, T::one());
            }
        }
        let beta = w.norm();
        if j + 1 == m {
            break;
        }
        if beta <= T::of(1e-14) {
            break;
        }
        betas.push(beta);
        basis.push(w / beta);
    }
    let m_eff = alphas.len();
    let mut tri = DMatrix::zeros(m_eff, m_eff);
    for j in 0..m_eff {
        tri[(j, j)] = alphas[j];
        if j + 1 < m_eff {
            tri[(j, j + 1)] = betas[j];
            tri[(j + 1, j)] = betas[j];
        }
    }
    let (theta, s) = symmetric_eigen_sorted(&tri);
    // largest theta of the inverse operator <-> lowest energies
    if m_eff < n_levels {
        return Err(Error::NoConvergence(format!(
            "Lanczos space of size {m_eff} cannot resolve {n_levels} levels"
        )));
    }
    let mut pairs: Vec<(T, usize)> = (0..m_eff).map(|i| (theta[i], i)).collect();
    pairs.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    let cell = (h1 * h2).sqrt();
    let mut eigenvalues = Vec::with_capacity(n_levels);
    let mut eigenvectors = Vec::with_capacity(n_levels);
    let mut hv = DVector::zeros(dof);
    for &(th, col) in pairs.iter().take(n_levels) {
        if th <= T::zero() {
            return Err(Error::NoConvergence(
                "non-positive Ritz value of the inverted operator".into(),
            ));
        }
        let energy = shift + T::one() / th;
        let mut y: DVector<T> = DVector::zeros(dof);
        for (j, q) in basis.iter().enumerate().take(m_eff) {
            y.axpy(s[(j, col)], q, T::one());
        }
        y /= y.norm();
        // residual check against the actual Hamiltonian
        ham.apply(&y, &mut hv);
        let resid = (&hv - &y * energy).norm();
        let scale = T::one() + energy.abs();
        if resid > T::of(1e-7) * scale {
            return Err(Error::NoConvergence(format!(
                "eigenpair residual {:e} at energy {:e}",
                resid.as_f64(),
                energy.as_f64()
            )));
        }
        // deterministic sign, then grid-measure normalization
        let lead = y.iter().cloned().fold(T::zero(), |a, b| {
            if b.abs() > a.abs() {
                b
            } else {
                a
            }
        });
        if lead < T::zero() {
            y = -y;
        }
        eigenvalues.push(energy);
        eigenvectors.push(y / cell);
    }
    // ascending by energy
    let mut order: Vec<usize> = (0..n_levels).collect();
    order.sort_by(|&a, &b| eigenvalues[a].partial_cmp(&eigenvalues[b]).unwrap());
    let eigenvalues_sorted: Vec<T> = order.iter().map(|&i| eigenvalues[i]).collect();
    let eigenvectors_sorted: Vec<DVector<T>> =
        order.iter().map(|&i| eigenvectors[i].clone()).collect();
    Ok(Spectrum2D {
        eigenvalues: eigenvalues_sorted,
        eigenvectors: eigenvectors_sorted,
        grid,
        masses,
        hbar,
    })
}

impl<T: Real> Spectrum2D<T> {
    /// Grid inner product `<a|b> = h1 h2 sum a_i b_i`.
    pub fn inner(&self, a: &DVector<T>, b: &DVector<T>) -> T {
        let [h1, h2] = self.grid.spacing();
        a.dot(b) * h1 * h2
    }

    /// Probability density of a level, row-major with x1 fastest.
    pub fn density(&self, level: usize) -> Result<Vec<T>> {
        let v = self
            .eigenvectors
            .get(level)
            .ok_or_else(|| Error::Parameter(format!("level {level} not computed")))?;
        Ok(v.iter().map(|&a| a * a).collect())
    }
}

/// Dense 1D Dirichlet eigensolve (second-order finite differences),
/// used for transverse localization energies and for complete-basis
/// expansions on small grids. Eigenvectors are normalized under the
/// grid measure `h`; all `n` levels are returned, ascending.
pub fn solve_dirichlet_1d<T: Real>(
    mass: T,
    hbar: T,
    potential_samples: &[T],
    lo: T,
    hi: T,
) -> Result<(Vec<T>, DMatrix<T>, T)> {
    let n = potential_samples.len();
    if n < 8 {
        return Err(Error::Parameter("need at least 8 interior points".into()));
    }
    if mass <= T::zero() || hbar <= T::zero() || hi <= lo {
        return Err(Error::Parameter("invalid 1D solver parameters".into()));
    }
    let h = (hi - lo) / T::of((n + 1) as f64);
    let t = hbar * hbar / (T::of(2.0) * mass * h * h);
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = T::of(2.0) * t + potential_samples[i];
        if i + 1 < n {
            m[(i, i + 1)] = -t;
            m[(i + 1, i)] = -t;
        }
    }
    let (values, mut vectors) = symmetric_eigen_sorted(&m);
    let scale = T::one() / h.sqrt();
    for j in 0..n {
        let mut col = vectors.column(j).clone_owned();
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
        vectors.set_column(j, &(col * scale));
    }
    Ok((values.iter().copied().collect(), vectors, h))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn empty_box_matches_particle_in_a_box() {
        let p = PotentialField::quadratic_saddle(&[0.0, 0.0]);
        let grid = GridBox {
            lo: [0.0, 0.0],
            hi: [1.0, 1.5],
            n: [48, 64],
        };
        let s = solve_grid_2d([1.0, 1.0], 1.0, &p, grid, 4).unwrap();
        let pi2 = std::f64::consts::PI.powi(2);
        let level = |nx: f64, ny: f64| 0.5 * pi2 * (nx * nx / 1.0 + ny * ny / 2.25);
        let mut expect = vec![
            level(1.0, 1.0),
            level(1.0, 2.0),
            level(2.0, 1.0),
            level(1.0, 3.0),
        ];
        expect.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (e, x) in s.eigenvalues.iter().zip(expect) {
            assert_relative_eq!(*e, x, max_relative = 5e-3);
        }
    }

    #[test]
    fn isotropic_well_reproduces_oscillator_ladder() {
        // V = x1^2 + x2^2, m = 1 -> omega = sqrt(2), E = omega (nx + ny + 1)
        let p = PotentialField::quadratic_saddle(&[1.0, 1.0]);
        let grid = GridBox {
            lo: [-7.0, -7.0],
            hi: [7.0, 7.0],
            n: [72, 72],
        };
        let s = solve_grid_2d([1.0, 1.0], 1.0, &p, grid, 6).unwrap();
        let w = 2.0f64.sqrt();
        let expect = [w, 2.0 * w, 2.0 * w, 3.0 * w, 3.0 * w, 3.0 * w];
        for (e, x) in s.eigenvalues.iter().zip(expect) {
            assert_relative_eq!(*e, x, max_relative = 0.01);
        }
    }

    #[test]
    fn confined_saddle_spectrum_is_orthonormal_with_small_rayleigh_error() {
        let p = PotentialField::quadratic_saddle_confined(&[1.0, -0.125], &[0.0, 0.005]);
        let grid = GridBox {
            lo: [-6.0, -7.5],
            hi: [6.0, 7.5],
            n: [48, 60],
        };
        let s = solve_grid_2d::<f64>([1.0, 1.0], 1.0, &p, grid, 8).unwrap();
        for i in 0..8 {
            for j in 0..8 {
                let dot = s.inner(&s.eigenvectors[i], &s.eigenvectors[j]);
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((dot - expect).abs() < 1e-8, "({i},{j}) -> {dot}");
            }
        }
        for w in s.eigenvalues.windows(2) {
            assert!(w[0] <= w[1]);
        }
    }

    #[test]
    fn deterministic_across_repeat_solves() {
        let p = PotentialField::quadratic_saddle(&[1.0, 1.0]);
        let grid = GridBox {
            lo: [-6.0, -6.0],
            hi: [6.0, 6.0],
            n: [32, 32],
        };
        let a = solve_grid_2d([1.0, 1.0], 1.0, &p, grid.clone(), 3).unwrap();
        let b = solve_grid_2d([1.0, 1.0], 1.0, &p, grid, 3).unwrap();
        for i in 0..3 {
            assert_eq!(a.eigenvalues[i], b.eigenvalues[i]);
            assert_eq!(a.eigenvectors[i], b.eigenvectors[i]);
        }
    }

    #[test]
    fn dirichlet_1d_matches_box_levels() {
        let n = 200;
        let v = vec![0.0; n];
        let (e, vecs, h) = solve_dirichlet_1d(1.0, 1.0, &v, 0.0, 1.0).unwrap();
        let pi2 = std::f64::consts::PI.powi(2);
        for k in 1..=4 {
            assert_relative_eq!(e[k - 1], 0.5 * pi2 * (k * k) as f64, max_relative = 1e-3);
        }
        // grid-measure normalization
        let norm: f64 = vecs.column(0).iter().map(|a| a * a).sum::<f64>() * h;
        assert_relative_eq!(norm, 1.0, epsilon = 1e-10);
    }
}
