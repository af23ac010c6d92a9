//! Time evolution of ambiguity fields.
//!
//! Four routes: the closed-form phase shear for a constant force, its
//! generator integrated with RK4, the general sine-kernel equation for a
//! Hamiltonian given as an ambiguity field, and linear canonical maps.
//!
//! Constant force `H = p^2/2m - F q`:
//!
//! ```text
//! dP/dt = ((eta/m) d_xi + i F xi / hbar) P
//! P(eta, xi, t) = exp(i F t (2 xi + eta t/m) / 2hbar) P0(eta, xi + eta t/m)
//! ```

use ndarray::Array2;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::field::{ComplexField, FieldKind};
use crate::fourier::RowSpectrum;
use crate::gaussian::{AmbiguityClosedFormGaussian, GaussianForm};
use crate::grid::{PhaseGrid, PhysicalConstants};
use crate::observables::OriginDerivatives;
use crate::stencil::{central_half_width, central_weights, DEFAULT_ACCURACY};

/// Relative amplitude below which samples count as outside the support.
pub const SUPPORT_THRESHOLD: f64 = 1e-8;

/// Norm growth factor treated as a blow-up.
pub const INSTABILITY_GROWTH: f64 = 10.0;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstantForceParams {
    m: f64,
    force: f64,
}

impl ConstantForceParams {
    pub fn new(m: f64, force: f64) -> Result<Self> {
        if !(m > 0.0 && m.is_finite()) || !force.is_finite() {
            return invalid(format!("need m > 0 and finite F, got m = {m}, F = {force}"));
        }
        Ok(Self { m, force })
    }

    pub fn mass(&self) -> f64 {
        self.m
    }

    pub fn force(&self) -> f64 {
        self.force
    }
}

/// `A'(eta, xi) = A(alpha eta + gamma xi, beta eta + delta xi)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearCanonicalMap {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
}

impl LinearCanonicalMap {
    pub const DET_TOLERANCE: f64 = 1e-9;

    pub fn new(alpha: f64, beta: f64, gamma: f64, delta: f64) -> Result<Self> {
        let map = Self {
            alpha,
            beta,
            gamma,
            delta,
        };
        map.validate()?;
        Ok(map)
    }

    pub fn identity() -> Self {
        Self {
            alpha: 1.0,
            beta: 0.0,
            gamma: 0.0,
            delta: 1.0,
        }
    }

    /// Harmonic oscillator evolution by phase angle `theta = omega t`.
    pub fn rotation(theta: f64, m: f64, omega: f64) -> Result<Self> {
        let (s, c) = theta.sin_cos();
        Self::new(c, s / (m * omega), -m * omega * s, c)
    }

    /// Free particle evolution for time `t`.
    pub fn free_shear(t: f64, m: f64) -> Result<Self> {
        Self::new(1.0, t / m, 0.0, 1.0)
    }

    pub fn determinant(&self) -> f64 {
        self.alpha * self.delta - self.beta * self.gamma
    }

    pub fn validate(&self) -> Result<()> {
        let det = self.determinant();
        if !det.is_finite() || (det - 1.0).abs() > Self::DET_TOLERANCE {
            return invalid(format!("canonical map has determinant {det}, expected 1"));
        }
        Ok(())
    }

    /// Source point for the output sample at `(eta, xi)`.
    pub fn source(&self, eta: f64, xi: f64) -> (f64, f64) {
        (self.alpha * eta + self.gamma * xi, self.beta * eta + self.delta * xi)
    }
}

/// Closed-form ambiguity function carrying its constants; the result of
/// propagating an analytic Gaussian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedFormAmbiguity {
    pub form: GaussianForm,
    pub constants: PhysicalConstants,
}

impl ClosedFormAmbiguity {
    pub fn value(&self, eta: f64, xi: f64) -> Complex64 {
        self.form.value(eta, xi)
    }

    pub fn sample(&self, grid: PhaseGrid) -> ComplexField {
        self.form.sample(grid, self.constants)
    }
}

impl From<AmbiguityClosedFormGaussian> for ClosedFormAmbiguity {
    fn from(g: AmbiguityClosedFormGaussian) -> Self {
        Self {
            form: g.form(),
            constants: g.constants,
        }
    }
}

impl OriginDerivatives for ClosedFormAmbiguity {
    fn derivative_at_origin(&self, a: usize, b: usize) -> Result<Complex64> {
        Ok(self.form.derivative_at_origin(a, b))
    }
}

/// Representations the closed-form constant-force propagator acts on.
pub trait ConstForceEvolvable: Sized {
    fn evolve_const_force(&self, params: &ConstantForceParams, t: f64) -> Result<Self>;
}

impl ConstForceEvolvable for ClosedFormAmbiguity {
    fn evolve_const_force(&self, params: &ConstantForceParams, t: f64) -> Result<Self> {
        let hbar = self.constants.hbar();
        let (m, f) = (params.m, params.force);
        let form = self.form.substitute([[1.0, 0.0], [t / m, 1.0]]).multiply_exp(
            [
                Complex64::new(0.0, f * t * t / (2.0 * m * hbar)),
                Complex64::new(0.0, f * t / hbar),
            ],
            [[ZERO; 2]; 2],
        );
        Ok(Self {
            form,
            constants: self.constants,
        })
    }
}

impl ConstForceEvolvable for ComplexField {
    fn evolve_const_force(&self, params: &ConstantForceParams, t: f64) -> Result<Self> {
        self.expect_kind(FieldKind::Ambiguity)?;
        let shear = t / params.m;
        check_shear_support(self, shear)?;
        let grid = *self.grid();
        let hbar = self.constants().hbar();
        let rows = XiRows::new(&grid, hbar);
        let (n1, n2) = grid.shape();
        let mut out = self.clone();
        let mut shifted = vec![ZERO; n2];
        for i in 0..n1 {
            let eta = grid.axis1.value(i);
            let s = eta * shear;
            let row: Vec<Complex64> = self.values().row(i).to_vec();
            let kappa0 = rows.kappa0(eta);
            let m: Vec<Complex64> = (0..n2)
                .map(|k| Complex64::from_polar(1.0, rows.kappa(kappa0, k) * s / hbar))
                .collect();
            rows.spectrum.multiply(&row, &rows.spectrum.carrier(kappa0), &m, &mut shifted);
            for (j, z) in shifted.iter().enumerate() {
                let xi = grid.axis2.value(j);
                let phase = params.force * t * (2.0 * xi + eta * shear) / (2.0 * hbar);
                out.values_mut()[[i, j]] = z * Complex64::from_polar(1.0, phase);
            }
        }
        Ok(out)
    }
}

/// Closed-form constant-force propagation; grid fields are sheared by
/// Fourier-phase shifts along each eta row.
pub fn evolve_const_force_closed<T: ConstForceEvolvable>(p0: &T, params: &ConstantForceParams, t: f64) -> Result<T> {
    p0.evolve_const_force(params, t)
}

/// Rows along xi at fixed eta are trigonometric sums over momenta
/// `p_0 + eta/2 + k dp`.
struct XiRows {
    spectrum: RowSpectrum,
    p0: f64,
}

impl XiRows {
    fn new(grid: &PhaseGrid, hbar: f64) -> Self {
        let n2 = grid.axis2.count();
        let spectrum = RowSpectrum::new(n2, grid.axis2.first(), grid.axis2.step(), hbar);
        let p0 = -((n2 as f64 - 1.0) / 2.0) * spectrum.dkappa();
        Self { spectrum, p0 }
    }

    fn kappa0(&self, eta: f64) -> f64 {
        self.p0 + eta / 2.0
    }

    fn kappa(&self, kappa0: f64, k: usize) -> f64 {
        kappa0 + k as f64 * self.spectrum.dkappa()
    }
}

fn significance_floor(field: &ComplexField) -> f64 {
    SUPPORT_THRESHOLD * field.max_abs()
}

/// Fails if a significant sample would leave the xi range under
/// `xi -> xi - eta * shear`.
fn check_shear_support(field: &ComplexField, shear: f64) -> Result<()> {
    let grid = field.grid();
    let floor = significance_floor(field);
    let (lo, hi) = (grid.axis2.first(), grid.axis2.last());
    let slack = 0.5 * grid.axis2.step();
    for ((i, j), z) in field.values().indexed_iter() {
        if z.norm() <= floor {
            continue;
        }
        let target = grid.axis2.value(j) - grid.axis1.value(i) * shear;
        if target < lo - slack || target > hi + slack {
            return Err(Error::DomainOverflow(format!(
                "support at (eta, xi) = ({:.4}, {:.4}) shears to xi = {target:.4}, outside [{lo:.4}, {hi:.4}]",
                grid.axis1.value(i),
                grid.axis2.value(j)
            )));
        }
    }
    Ok(())
}

fn rk4(
    mut p: Array2<Complex64>,
    dt: f64,
    steps: usize,
    rhs: impl Fn(&Array2<Complex64>) -> Array2<Complex64>,
) -> Result<Array2<Complex64>> {
    let norm = |a: &Array2<Complex64>| a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let n0 = norm(&p);
    for step in 0..steps {
        let k1 = rhs(&p);
        let k2 = rhs(&(&p + &(&k1 * Complex64::new(dt / 2.0, 0.0))));
        let k3 = rhs(&(&p + &(&k2 * Complex64::new(dt / 2.0, 0.0))));
        let k4 = rhs(&(&p + &(&k3 * Complex64::new(dt, 0.0))));
        p = p + (k1 + k2 * Complex64::new(2.0, 0.0) + k3 * Complex64::new(2.0, 0.0) + k4) * Complex64::new(dt / 6.0, 0.0);
        let n = norm(&p);
        if !n.is_finite() || n > INSTABILITY_GROWTH * n0 {
            return Err(Error::NumericalInstability(format!(
                "field norm grew from {n0:.3e} to {n:.3e} after {} steps",
                step + 1
            )));
        }
    }
    Ok(p)
}

fn check_steps(dt: f64, steps: usize) -> Result<()> {
    if !(dt > 0.0 && dt.is_finite()) || steps == 0 {
        return invalid(format!("need dt > 0 and steps > 0, got dt = {dt}, steps = {steps}"));
    }
    Ok(())
}

/// RK4 integration of the constant-force generator with spectral `d_xi`.
///
/// The step must satisfy `dt <= step_xi m / max|eta| / 4`, where the maximum
/// runs over eta rows holding significant amplitude.
pub fn evolve_generator_const_force(
    p: &ComplexField,
    params: &ConstantForceParams,
    dt: f64,
    steps: usize,
) -> Result<ComplexField> {
    p.expect_kind(FieldKind::Ambiguity)?;
    check_steps(dt, steps)?;
    let grid = *p.grid();
    let (n1, n2) = grid.shape();
    let floor = significance_floor(p);
    let max_eta = (0..n1)
        .filter(|&i| p.values().row(i).iter().any(|z| z.norm() > floor))
        .map(|i| grid.axis1.value(i).abs())
        .fold(0.0, f64::max);
    if max_eta > 0.0 {
        let bound = grid.axis2.step() * params.m / max_eta / 4.0;
        if dt > bound {
            return invalid(format!("dt = {dt} exceeds the stability bound {bound:.3e}"));
        }
    }
    check_shear_support(p, dt * steps as f64 / params.m)?;

    let hbar = p.constants().hbar();
    let rows = XiRows::new(&grid, hbar);
    let carriers: Vec<Vec<Complex64>> = (0..n1).map(|i| rows.spectrum.carrier(rows.kappa0(grid.axis1.value(i)))).collect();
    let multipliers: Vec<Vec<Complex64>> = (0..n1)
        .map(|i| {
            let kappa0 = rows.kappa0(grid.axis1.value(i));
            (0..n2).map(|k| Complex64::new(0.0, rows.kappa(kappa0, k) / hbar)).collect()
        })
        .collect();
    let force: Vec<Complex64> = (0..n2)
        .map(|j| Complex64::new(0.0, params.force * grid.axis2.value(j) / hbar))
        .collect();
    let rhs = |a: &Array2<Complex64>| {
        let mut out = Array2::zeros((n1, n2));
        let mut d = vec![ZERO; n2];
        for i in 0..n1 {
            let row: Vec<Complex64> = a.row(i).to_vec();
            rows.spectrum.multiply(&row, &carriers[i], &multipliers[i], &mut d);
            let v = grid.axis1.value(i) / params.m;
            for j in 0..n2 {
                out[[i, j]] = d[j] * v + force[j] * row[j];
            }
        }
        out
    };
    let values = rk4(p.values().clone(), dt, steps, rhs)?;
    ComplexField::new(grid, values, *p.constants())
}

/// Which side of the commutator the kernel equation integrates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// Schroedinger picture: a density operator.
    State,
    /// Heisenberg picture: an observable (`t -> -t`).
    Operator,
}

/// Hamiltonian samples below this fraction of its maximum are skipped in
/// the kernel quadrature.
pub const KERNEL_DROP: f64 = 1e-15;

/// RK4 integration of the sine-kernel equation
///
/// ```text
/// dP/dt (eta, xi) = (2/hbar) int deta' dxi' / sqrt(2 pi hbar)
///                   sin[(eta xi' - eta' xi) / 2hbar] H(eta', xi') P(eta - eta', xi - xi')
/// ```
///
/// by direct quadrature on the grid, with `P` taken as zero outside it.
/// `Direction::Operator` reverses the sign of the right-hand side.
pub fn evolve_kernel(
    p: &ComplexField,
    h: &ComplexField,
    dt: f64,
    steps: usize,
    direction: Direction,
) -> Result<ComplexField> {
    p.expect_kind(FieldKind::Ambiguity)?;
    p.check_compatible(h)?;
    check_steps(dt, steps)?;
    let kernel = SineKernel::new(h, direction)?;
    let values = rk4(p.values().clone(), dt, steps, |a| kernel.apply(a))?;
    ComplexField::new(*p.grid(), values, *p.constants())
}

/// Right-hand side of the kernel equation for a fixed Hamiltonian.
pub struct SineKernel {
    shape: (usize, usize),
    zero: (usize, usize),
    /// `(a', s', prefactor * H(a', s'))` for the retained samples.
    entries: Vec<(usize, usize, Complex64)>,
    /// `sin` and `cos` of `eta_a xi_s / 2hbar`.
    sin: Array2<f64>,
    cos: Array2<f64>,
}

impl SineKernel {
    pub fn new(h: &ComplexField, direction: Direction) -> Result<Self> {
        h.expect_kind(FieldKind::Ambiguity)?;
        let grid = *h.grid();
        let (Some(z1), Some(z2)) = (grid.axis1.zero_index(), grid.axis2.zero_index()) else {
            return invalid("kernel evolution needs grids through the origin");
        };
        let hbar = h.constants().hbar();
        let sign = match direction {
            Direction::State => 1.0,
            Direction::Operator => -1.0,
        };
        let pref = sign * 2.0 / hbar * grid.cell_area() / h.constants().seed_norm();
        let floor = KERNEL_DROP * h.max_abs();
        let entries = h
            .values()
            .indexed_iter()
            .filter(|(_, z)| z.norm() > floor)
            .map(|((a, s), z)| (a, s, z * pref))
            .collect();
        let angle = Array2::from_shape_fn(grid.shape(), |(a, s)| {
            grid.axis1.value(a) * grid.axis2.value(s) / (2.0 * hbar)
        });
        Ok(Self {
            shape: grid.shape(),
            zero: (z1, z2),
            entries,
            sin: angle.mapv(f64::sin),
            cos: angle.mapv(f64::cos),
        })
    }

    /// Number of Hamiltonian samples entering the quadrature.
    pub fn support(&self) -> usize {
        self.entries.len()
    }

    pub fn apply(&self, p: &Array2<Complex64>) -> Array2<Complex64> {
        let (n1, n2) = self.shape;
        let (z1, z2) = (self.zero.0 as i64, self.zero.1 as i64);
        let rows: Vec<Vec<Complex64>> = (0..n1)
            .into_par_iter()
            .map(|a| {
                let mut out = vec![ZERO; n2];
                for &(ap, sp, hv) in &self.entries {
                    let u = a as i64 - ap as i64 + z1;
                    if u < 0 || u >= n1 as i64 {
                        continue;
                    }
                    let u = u as usize;
                    // sin(A - B), A = eta_a xi_s' / 2hbar, B = eta_a' xi_s / 2hbar
                    let (sa, ca) = (self.sin[[a, sp]], self.cos[[a, sp]]);
                    let s_lo = (sp as i64 - z2).max(0) as usize;
                    let s_hi = ((n2 as i64 + sp as i64 - z2).min(n2 as i64)).max(0) as usize;
                    for s in s_lo..s_hi {
                        let v = s + z2 as usize - sp;
                        let w = sa * self.cos[[ap, s]] - ca * self.sin[[ap, s]];
                        out[s] += hv * p[[u, v]] * w;
                    }
                }
                out
            })
            .collect();
        Array2::from_shape_fn((n1, n2), |(a, s)| rows[a][s])
    }
}

/// Ambiguity field transported by a linear canonical map, sampled with
/// bicubic Hermite interpolation; points mapped outside the grid read zero.
pub fn evolve_linear_canonical(a: &ComplexField, map: &LinearCanonicalMap) -> Result<ComplexField> {
    a.expect_kind(FieldKind::Ambiguity)?;
    map.validate()?;
    let interp = Bicubic::new(a);
    let grid = *a.grid();
    Ok(ComplexField::from_fn(grid, *a.constants(), |eta, xi| {
        let (e, x) = map.source(eta, xi);
        interp.value(e, x)
    }))
}

/// Bicubic Hermite interpolant with high-order finite-difference slopes
/// (zero outside the grid).
struct Bicubic<'a> {
    field: &'a ComplexField,
    d1: Array2<Complex64>,
    d2: Array2<Complex64>,
    d12: Array2<Complex64>,
}

impl<'a> Bicubic<'a> {
    fn new(field: &'a ComplexField) -> Self {
        let v = field.values();
        let d1 = diff_axis(v, 0);
        let d2 = diff_axis(v, 1);
        let d12 = diff_axis(&d1, 1);
        Self { field, d1, d2, d12 }
    }

    fn value(&self, x1: f64, x2: f64) -> Complex64 {
        let g = self.field.grid();
        let (Some((i, t)), Some((j, u))) = (cell(&g.axis1, x1), cell(&g.axis2, x2)) else {
            return ZERO;
        };
        let v = self.field.values();
        let (h0t, h1t) = hermite(t);
        let (h0u, h1u) = hermite(u);
        let mut sum = ZERO;
        for (di, (a0, a1)) in [(0, (h0t[0], h1t[0])), (1, (h0t[1], h1t[1]))] {
            for (dj, (b0, b1)) in [(0, (h0u[0], h1u[0])), (1, (h0u[1], h1u[1]))] {
                let idx = [i + di, j + dj];
                sum += v[idx] * (a0 * b0) + self.d1[idx] * (a1 * b0) + self.d2[idx] * (a0 * b1) + self.d12[idx] * (a1 * b1);
            }
        }
        sum
    }
}

/// Cell index and local coordinate in `[0, 1]`, `None` outside the grid.
fn cell(axis: &crate::grid::Grid1D, x: f64) -> Option<(usize, f64)> {
    let f = (x - axis.first()) / axis.step();
    let last = (axis.count() - 1) as f64;
    let eps = 1e-12 * last.max(1.0);
    if !(f >= -eps && f <= last + eps) {
        return None;
    }
    let f = f.clamp(0.0, last);
    let i = (f.floor() as usize).min(axis.count() - 2);
    Some((i, f - i as f64))
}

/// Cubic Hermite basis: values `[h00, h01]` and slopes `[h10, h11]` weights.
fn hermite(t: f64) -> ([f64; 2], [f64; 2]) {
    let t2 = t * t;
    let t3 = t2 * t;
    (
        [2.0 * t3 - 3.0 * t2 + 1.0, -2.0 * t3 + 3.0 * t2],
        [t3 - 2.0 * t2 + t, t3 - t2],
    )
}

/// Derivative in index units along one axis, zero padded.
fn diff_axis(v: &Array2<Complex64>, axis: usize) -> Array2<Complex64> {
    let w = central_weights(1, DEFAULT_ACCURACY);
    let r = central_half_width(1, DEFAULT_ACCURACY) as i64;
    let (n1, n2) = v.dim();
    Array2::from_shape_fn((n1, n2), |(i, j)| {
        let mut sum = ZERO;
        for (k, wk) in (-r..=r).zip(&w) {
            let (a, b) = if axis == 0 { (i as i64 + k, j as i64) } else { (i as i64, j as i64 + k) };
            if a >= 0 && b >= 0 && (a as usize) < n1 && (b as usize) < n2 {
                sum += v[[a as usize, b as usize]] * *wk;
            }
        }
        sum
    })
}
