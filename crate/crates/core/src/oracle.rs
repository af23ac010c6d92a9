//! Dense-matrix quantum mechanics on the position grid, used as ground truth.
//!
//! An [`OperatorMatrix`] acts on sample vectors: for a kernel `K(q, q')` the
//! matrix is `step * K(q_j, q_l)`, so plain matrix traces are continuum
//! traces. The momentum operator is the periodic spectral one,
//! `p = F^dag diag(p_b) F` with `F[b][j] = exp(-i p_b q_j / hbar) / sqrt(N)`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;

use crate::error::{invalid, Error, Result};
use crate::stencil::{central_half_width, central_weights};
use crate::grid::{conjugate_grid, Anchor, Grid1D, PhysicalConstants};
use crate::observables::{Letter, PolynomialOperator};
use crate::states::{DensityMatrix, WaveFunction};

#[derive(Debug, Clone)]
pub struct OperatorMatrix {
    grid: Grid1D,
    entries: DMatrix<Complex64>,
    constants: PhysicalConstants,
}

impl OperatorMatrix {
    pub fn new(grid: Grid1D, entries: DMatrix<Complex64>, constants: PhysicalConstants) -> Result<Self> {
        if entries.nrows() != grid.count() || entries.ncols() != grid.count() {
            return invalid("operator matrix does not match its grid");
        }
        Ok(Self {
            grid,
            entries,
            constants,
        })
    }

    pub fn identity(grid: Grid1D, constants: PhysicalConstants) -> Self {
        let n = grid.count();
        Self {
            grid,
            entries: DMatrix::identity(n, n),
            constants,
        }
    }

    /// Matrix of a density matrix (`step * kernel`).
    pub fn from_density(rho: &DensityMatrix) -> Self {
        Self {
            grid: *rho.grid(),
            entries: rho.entries() * Complex64::new(rho.grid().step(), 0.0),
            constants: *rho.constants(),
        }
    }

    /// Kernel form (`entries / step`), ready for the ambiguity transforms.
    pub fn to_kernel(&self) -> DensityMatrix {
        DensityMatrix::new(
            self.grid,
            &self.entries / Complex64::new(self.grid.step(), 0.0),
            self.constants,
        )
        .expect("shape checked on construction")
    }

    #[inline]
    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    #[inline]
    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    #[inline]
    pub fn constants(&self) -> &PhysicalConstants {
        &self.constants
    }

    pub fn mul(&self, other: &OperatorMatrix) -> OperatorMatrix {
        OperatorMatrix {
            grid: self.grid,
            entries: &self.entries * &other.entries,
            constants: self.constants,
        }
    }

    pub fn adjoint(&self) -> OperatorMatrix {
        OperatorMatrix {
            grid: self.grid,
            entries: self.entries.adjoint(),
            constants: self.constants,
        }
    }

    pub fn hermitian_defect(&self) -> f64 {
        (&self.entries - self.entries.adjoint())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// `max |U U^dag - I|`.
    pub fn unitarity_defect(&self) -> f64 {
        let n = self.grid.count();
        (&self.entries * self.entries.adjoint() - DMatrix::<Complex64>::identity(n, n))
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &OperatorMatrix) -> f64 {
        (&self.entries - &other.entries)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// `<psi| M |psi>` with the grid inner product.
    pub fn expectation(&self, psi: &WaveFunction) -> Complex64 {
        let v = DVector::from_column_slice(psi.samples());
        (v.adjoint() * &self.entries * &v)[(0, 0)] * psi.grid().step()
    }
}

fn check_grid(grid: &Grid1D) -> Result<()> {
    if grid.anchor() != Anchor::Symmetric {
        return invalid("oracle operators need a symmetric position grid");
    }
    Ok(())
}

/// `F[b][j] = exp(-i p_b q_j / hbar) / sqrt(N)` on the symmetric grids.
fn fourier_matrix(grid: &Grid1D, p: &Grid1D, c: &PhysicalConstants) -> DMatrix<Complex64> {
    let n = grid.count();
    let norm = (n as f64).sqrt().recip();
    DMatrix::from_fn(n, n, |b, j| {
        Complex64::from_polar(norm, -p.value(b) * grid.value(j) / c.hbar())
    })
}

/// `F^dag diag(f(p_b)) F` on the symmetric momentum lattice.
fn momentum_function(grid: &Grid1D, c: &PhysicalConstants, f: impl Fn(f64) -> Complex64) -> DMatrix<Complex64> {
    momentum_function_on(grid, &conjugate_grid(grid, c), c, f)
}

fn momentum_function_on(
    grid: &Grid1D,
    p: &Grid1D,
    c: &PhysicalConstants,
    f: impl Fn(f64) -> Complex64,
) -> DMatrix<Complex64> {
    let fm = fourier_matrix(grid, p, c);
    let mut scaled = fm.clone();
    for (b, mut row) in scaled.row_iter_mut().enumerate() {
        row *= f(p.value(b));
    }
    fm.adjoint() * scaled
}

/// `(q, p)` on the grid.
pub fn operator_matrices(grid: &Grid1D, c: &PhysicalConstants) -> Result<(OperatorMatrix, OperatorMatrix)> {
    check_grid(grid)?;
    if grid.count() < 8 {
        return invalid("operator matrices need at least 8 grid points");
    }
    let n = grid.count();
    let q = DMatrix::from_fn(n, n, |j, l| {
        if j == l {
            Complex64::new(grid.value(j), 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let p = momentum_function(grid, c, |k| Complex64::new(k, 0.0));
    Ok((
        OperatorMatrix::new(*grid, q, *c)?,
        OperatorMatrix::new(*grid, p, *c)?,
    ))
}

/// Matrix of a word-ordered polynomial in `q` and `p`.
pub fn polynomial_matrix(op: &PolynomialOperator, grid: &Grid1D, c: &PhysicalConstants) -> Result<OperatorMatrix> {
    let (q, p) = operator_matrices(grid, c)?;
    let n = grid.count();
    let mut total = DMatrix::<Complex64>::zeros(n, n);
    for term in op.terms() {
        let mut m = DMatrix::<Complex64>::identity(n, n);
        for letter in &term.word {
            m = match letter {
                Letter::Q => m * q.entries(),
                Letter::P => m * p.entries(),
            };
        }
        total += m * term.coefficient;
    }
    OperatorMatrix::new(*grid, total, *c)
}

/// Multiplication operator `V(q)`.
pub fn potential_matrix(grid: &Grid1D, c: &PhysicalConstants, v: impl Fn(f64) -> f64) -> Result<OperatorMatrix> {
    check_grid(grid)?;
    let n = grid.count();
    let m = DMatrix::from_fn(n, n, |j, l| {
        if j == l {
            Complex64::new(v(grid.value(j)), 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    OperatorMatrix::new(*grid, m, *c)
}

/// `p^2 / 2m + V(q)`.
///
/// The kinetic term is the periodic spectral Laplacian: momenta on the
/// origin-anchored lattice `k dp`, so the matrix is circulant. (For even `N`
/// the symmetric lattice would give an antiperiodic kernel.)
pub fn hamiltonian_matrix(
    grid: &Grid1D,
    c: &PhysicalConstants,
    mass: f64,
    v: impl Fn(f64) -> f64,
) -> Result<OperatorMatrix> {
    if !(mass > 0.0) {
        return invalid("mass must be positive");
    }
    check_grid(grid)?;
    let p = Grid1D::origin_anchored(grid.count(), conjugate_grid(grid, c).step())?;
    let kinetic = momentum_function_on(grid, &p, c, |k| Complex64::new(k * k / (2.0 * mass), 0.0));
    let pot = potential_matrix(grid, c, v)?;
    OperatorMatrix::new(*grid, kinetic + pot.entries(), *c)
}

/// `p^2 / 2m + V(q)` with a banded kinetic term: the periodic central
/// difference `-hbar^2/2m d^2/dq^2` of the given accuracy order. Its
/// ambiguity function is confined to `eta = 0`, `|xi| <= r h`.
pub fn hamiltonian_matrix_banded(
    grid: &Grid1D,
    c: &PhysicalConstants,
    mass: f64,
    accuracy: usize,
    v: impl Fn(f64) -> f64,
) -> Result<OperatorMatrix> {
    if !(mass > 0.0) {
        return invalid("mass must be positive");
    }
    check_grid(grid)?;
    let n = grid.count();
    let r = central_half_width(2, accuracy);
    if 2 * r + 1 > n {
        return invalid("stencil wider than the grid");
    }
    let w = central_weights(2, accuracy);
    let scale = -c.hbar() * c.hbar() / (2.0 * mass * grid.step() * grid.step());
    let mut m = potential_matrix(grid, c, v)?.entries;
    for j in 0..n {
        for (k, wk) in w.iter().enumerate() {
            let l = (j as i64 + k as i64 - r as i64).rem_euclid(n as i64) as usize;
            m[(j, l)] += Complex64::new(scale * wk, 0.0);
        }
    }
    OperatorMatrix::new(*grid, m, *c)
}

/// `exp(i eta q / 2hbar) exp(i xi p / hbar) exp(i eta q / 2hbar)`, equal to
/// `exp(i(eta q + xi p)/hbar)`; divide by `sqrt(2 pi hbar)` for the seed.
pub fn displacement_matrix_grid(grid: &Grid1D, eta: f64, xi: f64, c: &PhysicalConstants) -> Result<OperatorMatrix> {
    check_grid(grid)?;
    if xi.abs() > grid.period() {
        return invalid(format!("xi = {xi} exceeds the grid extent"));
    }
    let hbar = c.hbar();
    let g = momentum_function(grid, c, |k| Complex64::from_polar(1.0, xi * k / hbar));
    let half: Vec<Complex64> = (0..grid.count())
        .map(|j| Complex64::from_polar(1.0, eta * grid.value(j) / (2.0 * hbar)))
        .collect();
    let m = DMatrix::from_fn(grid.count(), grid.count(), |j, l| half[j] * g[(j, l)] * half[l]);
    OperatorMatrix::new(*grid, m, *c)
}

/// `exp(i eta q/hbar) exp(i xi p/hbar) exp(i eta xi/2hbar)`.
pub fn displacement_matrix_ordered(grid: &Grid1D, eta: f64, xi: f64, c: &PhysicalConstants) -> Result<OperatorMatrix> {
    check_grid(grid)?;
    let hbar = c.hbar();
    let g = momentum_function(grid, c, |k| Complex64::from_polar(1.0, xi * k / hbar));
    let phase = Complex64::from_polar(1.0, eta * xi / (2.0 * hbar));
    let m = DMatrix::from_fn(grid.count(), grid.count(), |j, l| {
        Complex64::from_polar(1.0, eta * grid.value(j) / hbar) * g[(j, l)] * phase
    });
    OperatorMatrix::new(*grid, m, *c)
}

/// Plain matrix trace of `A B`, the continuum `Tr{AB}`.
pub fn trace_direct(a: &OperatorMatrix, b: &OperatorMatrix) -> Result<Complex64> {
    if !a.grid.same_shape(&b.grid) {
        return invalid("operators live on different grids");
    }
    a.constants.check_same(&b.constants)?;
    let n = a.grid.count();
    let mut t = Complex64::new(0.0, 0.0);
    for j in 0..n {
        for l in 0..n {
            t += a.entries[(j, l)] * b.entries[(l, j)];
        }
    }
    Ok(t)
}

/// Eigen-decomposition of a Hermitian operator, eigenvalues ascending.
pub fn eigen(h: &OperatorMatrix) -> Result<(Vec<f64>, DMatrix<Complex64>)> {
    let scale = h.entries.iter().map(|z| z.norm()).fold(1.0, f64::max);
    if h.hermitian_defect() > 1e-10 * scale {
        return invalid("operator is not Hermitian");
    }
    let herm = (&h.entries + h.entries.adjoint()) * Complex64::new(0.5, 0.0);
    let e = SymmetricEigen::new(herm);
    let mut order: Vec<usize> = (0..e.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| e.eigenvalues[a].total_cmp(&e.eigenvalues[b]));
    let values = order.iter().map(|&i| e.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(h.grid.count(), order.len(), |r, k| e.eigenvectors[(r, order[k])]);
    Ok((values, vectors))
}

/// `rho(t) = U rho U^dag`, `U = exp(-i H t / hbar)` by eigendecomposition.
pub fn evolve_density_exact(rho: &DensityMatrix, h: &OperatorMatrix, t: f64) -> Result<DensityMatrix> {
    if !rho.grid().same_shape(&h.grid) {
        return invalid("state and Hamiltonian live on different grids");
    }
    rho.constants().check_same(&h.constants)?;
    let (values, v) = eigen(h)?;
    let hbar = h.constants.hbar();
    let mut vd = v.clone();
    for (k, mut col) in vd.column_iter_mut().enumerate() {
        col *= Complex64::from_polar(1.0, -values[k] * t / hbar);
    }
    let u = vd * v.adjoint();
    let out = &u * rho.entries() * u.adjoint();
    DensityMatrix::new(*rho.grid(), out, *rho.constants())
}

/// Grid reflection `j -> N - 1 - j`.
pub fn reflection_matrix(grid: &Grid1D) -> DMatrix<Complex64> {
    let n = grid.count();
    DMatrix::from_fn(n, n, |j, l| {
        if j + l == n - 1 {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// Displaced parity `(1/(pi hbar)) T R T^dag` with `T = exp(i p q/hbar) exp(-i q p/hbar)`,
/// which is `D(eta = p, xi = -q)` up to a phase that cancels. `S R S^dag`
/// collapses to a translation by `2q`, an integer number of steps, so the
/// result is an exact signed permutation times diagonal phases.
pub fn displaced_parity(grid: &Grid1D, q: f64, p: f64, c: &PhysicalConstants) -> Result<OperatorMatrix> {
    check_grid(grid)?;
    let hbar = c.hbar();
    let s = momentum_function(grid, c, |k| Complex64::from_polar(1.0, -q * k / hbar));
    let boost: Vec<Complex64> = (0..grid.count())
        .map(|j| Complex64::from_polar(1.0, p * grid.value(j) / hbar))
        .collect();
    let srs = &s * reflection_matrix(grid) * s.adjoint();
    let m = DMatrix::from_fn(grid.count(), grid.count(), |j, l| {
        boost[j] * srs[(j, l)] * boost[l].conj() / (PI * hbar)
    });
    OperatorMatrix::new(*grid, m, *c)
}

/// Quadrature `(2 pi hbar)^(-2) sum deta dxi exp(-i(eta q + xi p)/hbar) D(eta, xi)`.
///
/// Using `D[j][l] = exp(i eta (q_j + q_l)/2hbar) G_xi[j][l]` the double sum
/// factorizes into an eta sum depending on `j + l` times
/// `F^dag diag(g) F` with `g_b = sum_xi dxi exp(i xi (p_b - p)/hbar)`. The eta
/// lattice has `4N` points of step `pi hbar / (N h)`; the xi lattice is the
/// natural one, `sigma h` for `sigma` in `[-N/2, N/2)`.
pub fn seed_quadrature(grid: &Grid1D, q: f64, p: f64, c: &PhysicalConstants) -> Result<OperatorMatrix> {
    check_grid(grid)?;
    let n = grid.count();
    let h = grid.step();
    let hbar = c.hbar();
    let ne = 4 * n;
    let deta = PI * hbar / (n as f64 * h);
    let eta0 = -((ne / 2) as f64) * deta;
    // K[m] for j + l = m
    let k: Vec<Complex64> = (0..2 * n - 1)
        .map(|m| {
            let centre = (grid.value(0) * 2.0 + m as f64 * h) / 2.0;
            (0..ne)
                .map(|a| Complex64::from_polar(deta, (eta0 + a as f64 * deta) * (centre - q) / hbar))
                .sum()
        })
        .collect();
    let xi0 = -((n / 2) as i64);
    let g = momentum_function(grid, c, |pb| {
        (0..n as i64)
            .map(|s| Complex64::from_polar(h, (xi0 + s) as f64 * h * (pb - p) / hbar))
            .sum()
    });
    let scale = (2.0 * PI * hbar).powi(-2);
    let m = DMatrix::from_fn(n, n, |j, l| k[j + l] * g[(j, l)] * scale);
    OperatorMatrix::new(*grid, m, *c)
}

/// Wigner seed at the phase-grid point `(q_idx, p_idx)`, computed as a
/// displaced parity and checked against the Fourier quadrature of the
/// displacement operator on the block `|j - l| < N/2`, `|(q_j + q_l)/2 - q| < L/4`.
/// Outside it the periodic grid adds a mirror image at `q_j + q_l = 2q +- L`.
pub fn wigner_seed_matrix(grid: &Grid1D, q_idx: usize, p_idx: usize, c: &PhysicalConstants) -> Result<OperatorMatrix> {
    let (w, defect) = wigner_seed_with_defect(grid, q_idx, p_idx, c)?;
    if defect > 1e-5 {
        return Err(Error::ConsistencyFailure(format!(
            "Wigner seed paths disagree by {defect:.3e} at ({q_idx}, {p_idx})"
        )));
    }
    Ok(w)
}

/// Displaced-parity seed together with its max-norm distance to the quadrature path.
pub fn wigner_seed_with_defect(
    grid: &Grid1D,
    q_idx: usize,
    p_idx: usize,
    c: &PhysicalConstants,
) -> Result<(OperatorMatrix, f64)> {
    check_grid(grid)?;
    let n = grid.count();
    let pgrid = conjugate_grid(grid, c);
    if q_idx >= n || p_idx >= n {
        return invalid("phase-space index outside the grid");
    }
    let (q, p) = (grid.value(q_idx), pgrid.value(p_idx));
    let b = displaced_parity(grid, q, p, c)?;
    let a = seed_quadrature(grid, q, p, c)?;
    let quarter = grid.period() / 4.0;
    let mut defect = 0.0f64;
    for j in 0..n {
        for l in 0..n {
            let centre = 0.5 * (grid.value(j) + grid.value(l));
            if j.abs_diff(l) < n / 2 && (centre - q).abs() < quarter {
                defect = defect.max((a.entries[(j, l)] - b.entries[(j, l)]).norm());
            }
        }
    }
    Ok((b, defect))
}

/// Pass/fail record for one continuum identity.
#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub max_error: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl CheckResult {
    pub fn new(name: &str, max_error: f64, tolerance: f64) -> Self {
        Self {
            name: name.to_string(),
            max_error,
            tolerance,
            passed: max_error <= tolerance,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ContinuumReport {
    pub count: usize,
    pub step: f64,
    pub hbar: f64,
    pub checks: Vec<CheckResult>,
    pub passed: bool,
}

/// Grid-level checks of the displacement algebra, using localized Gaussian
/// test states so that periodic wraparound does not enter.
pub fn verify_continuum_identities(grid: &Grid1D, c: &PhysicalConstants) -> Result<ContinuumReport> {
    use crate::states::{gaussian_wavefunction, GaussianSpec};
    check_grid(grid)?;
    let hbar = c.hbar();
    let width = grid.period() / 16.0;
    let psi = gaussian_wavefunction(&GaussianSpec::new(0.0, 0.0, width * width)?, grid, c)?;
    let v = DVector::from_column_slice(psi.samples());
    let h = grid.step();
    let eta_step = conjugate_grid(grid, c).step();
    let (e1, x1) = (2.0 * eta_step, 3.0 * h);
    let (e2, x2) = (-1.0 * eta_step, 2.0 * h);
    let mut checks = Vec::new();

    let d1 = displacement_matrix_grid(grid, e1, x1, c)?;
    let d2 = displacement_matrix_grid(grid, e2, x2, c)?;
    checks.push(CheckResult::new("displacement unitary", d1.unitarity_defect(), 1e-10));

    let ordered = displacement_matrix_ordered(grid, e1, x1, c)?;
    checks.push(CheckResult::new("symmetric vs ordered factorization", d1.max_abs_diff(&ordered), 1e-9));

    let lhs = d1.entries() * d2.entries() * &v;
    let d12 = displacement_matrix_grid(grid, e1 + e2, x1 + x2, c)?;
    let phase = Complex64::from_polar(1.0, -(e1 * x2 - e2 * x1) / (2.0 * hbar));
    let rhs = d12.entries() * &v * phase;
    let comp = (lhs - rhs).iter().map(|z| z.norm()).fold(0.0, f64::max);
    checks.push(CheckResult::new("composition phase", comp, 1e-8));

    let (qm, pm) = operator_matrices(grid, c)?;
    let n = grid.count();
    let id = DMatrix::<Complex64>::identity(n, n);
    let conj_q = d1.entries() * qm.entries() * d1.entries().adjoint() - (qm.entries() + &id * Complex64::new(x1, 0.0));
    let conj_p = d1.entries() * pm.entries() * d1.entries().adjoint() - (pm.entries() - &id * Complex64::new(e1, 0.0));
    let eq = (conj_q * &v).iter().map(|z| z.norm()).fold(0.0, f64::max);
    let ep = (conj_p * &v).iter().map(|z| z.norm()).fold(0.0, f64::max);
    checks.push(CheckResult::new("conjugation D q D^dag = q + xi", eq, 1e-7));
    checks.push(CheckResult::new("conjugation D p D^dag = p - eta", ep, 1e-7));

    // (1/2 pi hbar) Tr{D D'^dag} is a discrete delta of height 1/(deta dxi)
    let coincide = trace_direct(&d1, &d1.adjoint())? / (2.0 * PI * hbar);
    let height = 1.0 / (eta_step * h);
    let sep = trace_direct(&d1, &d2.adjoint())?.norm() / (2.0 * PI * hbar);
    checks.push(CheckResult::new(
        "orthogonality",
        (coincide.re - height).abs() / height + sep,
        1e-6,
    ));

    let qi = n / 2 - 2;
    let pi = n / 2 + 1;
    let (_, defect) = wigner_seed_with_defect(grid, qi, pi, c)?;
    checks.push(CheckResult::new("Wigner seed quadrature vs displaced parity", defect, 1e-5));

    let passed = checks.iter().all(|c| c.passed);
    Ok(ContinuumReport {
        count: n,
        step: h,
        hbar,
        checks,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ambiguity::{ambiguity_from_density, wigner_from_density};
    use crate::grid::make_centered_grid;
    use crate::states::{density_from_wavefunction, gaussian_wavefunction, GaussianSpec};

    fn c1() -> PhysicalConstants {
        PhysicalConstants::default()
    }

    fn gauss(n: usize, h: f64, x: f64, k: f64, d: f64) -> WaveFunction {
        let g = make_centered_grid(n, h).unwrap();
        gaussian_wavefunction(&GaussianSpec::new(x, k, d).unwrap(), &g, &c1()).unwrap()
    }

    #[test]
    fn canonical_pair_moments() {
        let psi = gauss(128, 0.15, 1.0, 2.0, 1.0);
        let (q, p) = operator_matrices(psi.grid(), &c1()).unwrap();
        assert!(q.hermitian_defect() < 1e-12 && p.hermitian_defect() < 1e-12);
        assert!((q.expectation(&psi).re - 1.0).abs() < 1e-8);
        let p2 = p.mul(&p).expectation(&psi).re;
        assert!((p2 - 4.5).abs() < 1e-6);
        let comm = q.mul(&p).expectation(&psi) - p.mul(&q).expectation(&psi);
        assert!((comm - Complex64::new(0.0, 1.0)).norm() < 1e-6);
        assert!(operator_matrices(&make_centered_grid(4, 1.0).unwrap(), &c1()).is_err());
    }

    #[test]
    fn displacement_basics() {
        let g = make_centered_grid(64, 0.25).unwrap();
        let d0 = displacement_matrix_grid(&g, 0.0, 0.0, &c1()).unwrap();
        assert!(d0.max_abs_diff(&OperatorMatrix::identity(g, c1())) < 1e-12);
        let d = displacement_matrix_grid(&g, 0.7, -1.3, &c1()).unwrap();
        assert!(d.unitarity_defect() < 1e-10);
        // exact as matrices when both factors are lattice operations
        let g = make_centered_grid(65, 0.25).unwrap();
        let eta = 4.0 * conjugate_grid(&g, &c1()).step();
        let d = displacement_matrix_grid(&g, eta, -1.25, &c1()).unwrap();
        let o = displacement_matrix_ordered(&g, eta, -1.25, &c1()).unwrap();
        assert!(d.max_abs_diff(&o) < 1e-9);
    }

    #[test]
    fn displacement_expectation_is_ambiguity() {
        let psi = gauss(128, 0.15, 0.0, 0.0, 1.0);
        let g = *psi.grid();
        let c = c1();
        let d = displacement_matrix_grid(&g, 1.0, 1.0, &c).unwrap();
        let v = d.expectation(&psi) / c.seed_norm();
        let want = (2.0 * PI).powf(-0.5) * (-0.5f64).exp();
        assert!((v.re - want).abs() < 1e-10 && v.im.abs() < 1e-10);

        let psi = gauss(96, 0.2, 0.6, -0.9, 1.3);
        let rho = density_from_wavefunction(&psi);
        let a = ambiguity_from_density(&rho).unwrap();
        for &(ia, is) in &[(48usize, 48usize), (50, 45), (40, 53), (57, 49)] {
            let eta = a.grid().axis1.value(ia);
            let xi = a.grid().axis2.value(is);
            let d = displacement_matrix_grid(psi.grid(), eta, xi, &c).unwrap();
            let tr = trace_direct(&OperatorMatrix::from_density(&rho), &d).unwrap() / c.seed_norm();
            assert!((tr - a.values()[[ia, is]]).norm() < 1e-7);
        }
    }

    #[test]
    fn traces() {
        let psi = gauss(96, 0.2, 1.0, 0.0, 1.0);
        let rho = OperatorMatrix::from_density(&density_from_wavefunction(&psi));
        let id = OperatorMatrix::identity(*psi.grid(), c1());
        assert!((trace_direct(&rho, &id).unwrap().re - 1.0).abs() < 1e-10);
        assert!((trace_direct(&rho, &rho).unwrap().re - 1.0).abs() < 1e-8);
        let (q, _) = operator_matrices(psi.grid(), &c1()).unwrap();
        assert!((trace_direct(&rho, &q).unwrap().re - 1.0).abs() < 1e-8);
    }

    #[test]
    fn exact_free_evolution() {
        let psi = gauss(256, 0.1, -1.0, 1.5, 1.0);
        let c = c1();
        let rho = density_from_wavefunction(&psi);
        let h = hamiltonian_matrix(psi.grid(), &c, 1.0, |_| 0.0).unwrap();
        let same = evolve_density_exact(&rho, &h, 0.0).unwrap();
        assert!(same.max_abs_diff(&rho) < 1e-10);
        let (q, _) = operator_matrices(psi.grid(), &c).unwrap();
        let out = evolve_density_exact(&rho, &h, 1.2).unwrap();
        let qt = trace_direct(&OperatorMatrix::from_density(&out), &q).unwrap().re;
        assert!((qt - (-1.0 + 1.5 * 1.2)).abs() < 1e-6);
        assert!((out.trace().re - 1.0).abs() < 1e-9);
        assert!((crate::states::purity(&out) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn stationary_state_is_fixed() {
        let g = make_centered_grid(64, 0.25).unwrap();
        let c = c1();
        let h = hamiltonian_matrix(&g, &c, 1.0, |q| 0.5 * q * q).unwrap();
        let (_, v) = eigen(&h).unwrap();
        let n = 64;
        let col = v.column(0);
        let entries = DMatrix::from_fn(n, n, |j, l| col[j] * col[l].conj() / g.step());
        let rho = DensityMatrix::new(g, entries, c).unwrap();
        let out = evolve_density_exact(&rho, &h, 3.7).unwrap();
        assert!(out.max_abs_diff(&rho) < 1e-9);
        let bad = OperatorMatrix::new(g, DMatrix::from_fn(n, n, |j, l| Complex64::new(j as f64, l as f64)), c).unwrap();
        assert!(evolve_density_exact(&rho, &bad, 1.0).is_err());
    }

    #[test]
    fn wigner_seed_two_paths() {
        let g = make_centered_grid(64, 0.25).unwrap();
        let c = c1();
        for &(qi, pi) in &[(32usize, 32usize), (28, 36), (40, 20)] {
            let (_, d) = wigner_seed_with_defect(&g, qi, pi, &c).unwrap();
            assert!(d < 1e-5, "defect {d}");
        }
    }

    #[test]
    fn wigner_seed_at_origin_is_reflection() {
        let g = make_centered_grid(65, 0.25).unwrap();
        let c = c1();
        let w = wigner_seed_matrix(&g, 32, 32, &c).unwrap();
        let r = reflection_matrix(&g) / Complex64::new(PI, 0.0);
        let diff = (w.entries() - r).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(diff < 1e-12);
    }

    #[test]
    fn wigner_seed_trace_matches_wigner_field() {
        let psi = gauss(64, 0.25, 0.5, -0.5, 1.0);
        let c = c1();
        let rho = density_from_wavefunction(&psi);
        let w = wigner_from_density(&rho).unwrap();
        let rm = OperatorMatrix::from_density(&rho);
        for &(qi, pi) in &[(32usize, 31usize), (30, 28), (35, 33)] {
            let seed = wigner_seed_matrix(psi.grid(), qi, pi, &c).unwrap();
            let tr = trace_direct(&rm, &seed).unwrap();
            assert!((tr - w.values()[[qi, pi]]).norm() < 1e-6);
        }
        let psi = gauss(65, 0.25, 0.0, 0.0, 1.0);
        let rm = OperatorMatrix::from_density(&density_from_wavefunction(&psi));
        let seed = wigner_seed_matrix(psi.grid(), 32, 32, &c).unwrap();
        assert!((trace_direct(&rm, &seed).unwrap().re - 1.0 / PI).abs() < 1e-10);
    }

    #[test]
    fn continuum_report_passes() {
        let g = make_centered_grid(64, 0.25).unwrap();
        let r = verify_continuum_identities(&g, &c1()).unwrap();
        for check in &r.checks {
            assert!(check.passed, "{} failed: {:e}", check.name, check.max_error);
        }
    }
}
