//! Test states on a position grid: Gaussian packets, superpositions of
//! localized packets, and their density matrices.
//!
//! Samples are values of the continuum wavefunction, `psi[j] = psi(q_j)`, so the
//! norm is `step * sum |psi[j]|^2`. Density-matrix entries are kernel values
//! `rho[j][l] = <q_j| rho |q_l>`; traces carry the same `step` weight.
//!
//! Position eigenstates are only represented through narrow packets; the
//! delta-function forms are their zero-width limits.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{invalid, Error, Result};
use crate::fourier::Dft;
use crate::grid::{conjugate_grid, Grid1D, PhysicalConstants};

/// Relative amplitude a packet may still have at the grid edge.
pub const TAIL_TOLERANCE: f64 = 1e-8;

/// A Gaussian packet centred at position `x` with mean momentum `k` and
/// width parameter `delta` (position squared; `Var(q) = delta / 2`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianSpec {
    pub x: f64,
    pub k: f64,
    pub delta: f64,
}

impl GaussianSpec {
    pub fn new(x: f64, k: f64, delta: f64) -> Result<Self> {
        let spec = Self { x, k, delta };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return invalid(format!("Gaussian width delta must be positive, got {}", self.delta));
        }
        if !(self.x.is_finite() && self.k.is_finite()) {
            return invalid("Gaussian center must be finite");
        }
        Ok(())
    }

    /// Unnormalized-on-grid continuum value `(pi delta)^(-1/4) exp(-(q-x)^2/(2 delta) + i k q / hbar)`.
    pub fn amplitude(&self, q: f64, hbar: f64) -> Complex64 {
        let d = q - self.x;
        (PI * self.delta).powf(-0.25)
            * Complex64::from_polar((-d * d / (2.0 * self.delta)).exp(), self.k * q / hbar)
    }
}

#[derive(Debug, Clone)]
pub struct WaveFunction {
    grid: Grid1D,
    samples: Vec<Complex64>,
    constants: PhysicalConstants,
}

impl WaveFunction {
    pub fn new(grid: Grid1D, samples: Vec<Complex64>, constants: PhysicalConstants) -> Result<Self> {
        if samples.len() != grid.count() {
            return invalid(format!(
                "{} samples for a grid of {} points",
                samples.len(),
                grid.count()
            ));
        }
        Ok(Self {
            grid,
            samples,
            constants,
        })
    }

    #[inline]
    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    #[inline]
    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    #[inline]
    pub fn constants(&self) -> &PhysicalConstants {
        &self.constants
    }

    /// `step * sum |psi|^2`.
    pub fn norm_sqr(&self) -> f64 {
        self.grid.step() * self.samples.iter().map(|z| z.norm_sqr()).sum::<f64>()
    }

    pub fn normalize(&mut self) -> Result<()> {
        let n = self.norm_sqr();
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::InvalidArgument("cannot normalize a zero state".into()));
        }
        let s = n.sqrt().recip();
        self.samples.iter_mut().for_each(|z| *z *= s);
        Ok(())
    }

    /// `<psi| f(q) |psi>` by grid quadrature.
    pub fn position_moment(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.grid.step()
            * self
                .samples
                .iter()
                .enumerate()
                .map(|(j, z)| z.norm_sqr() * f(self.grid.value(j)))
                .sum::<f64>()
    }

    /// `(p^n psi)(q_j)` with `p = -i hbar d/dq` applied spectrally.
    pub fn apply_momentum_power(&self, n: u32) -> Vec<Complex64> {
        let hbar = self.constants.hbar();
        let p = conjugate_grid(&self.grid, &self.constants);
        let mut row = self.samples.clone();
        Dft::new(row.len()).spectral_multiply(
            &mut row,
            self.grid.first(),
            self.grid.step(),
            p.first(),
            hbar,
            |k| Complex64::new(k.powi(n as i32), 0.0),
        );
        row
    }

    /// `<psi| p^n |psi>` with a spectral momentum operator.
    pub fn momentum_moment(&self, n: u32) -> Complex64 {
        let pv = self.apply_momentum_power(n);
        self.grid.step()
            * self
                .samples
                .iter()
                .zip(&pv)
                .map(|(a, b)| a.conj() * b)
                .sum::<Complex64>()
    }

    /// Momentum-space amplitude `phi(p) = (2 pi hbar)^(-1/2) int dq exp(-i p q / hbar) psi(q)`.
    pub fn momentum_amplitude(&self, p: f64) -> Complex64 {
        let hbar = self.constants.hbar();
        self.grid.step() / self.constants.seed_norm()
            * self
                .samples
                .iter()
                .enumerate()
                .map(|(j, z)| z * Complex64::from_polar(1.0, -p * self.grid.value(j) / hbar))
                .sum::<Complex64>()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &WaveFunction) -> Complex64 {
        self.grid.step()
            * self
                .samples
                .iter()
                .zip(&other.samples)
                .map(|(a, b)| a.conj() * b)
                .sum::<Complex64>()
    }
}

fn check_tails(grid: &Grid1D, centers: &[f64], delta: f64) -> Result<()> {
    for &x in centers {
        let edge = (x - grid.first()).min(grid.last() - x);
        if edge <= 0.0 {
            return Err(Error::DomainTooSmall(format!(
                "packet center {x} lies outside the grid [{}, {}]",
                grid.first(),
                grid.last()
            )));
        }
        let tail = (-edge * edge / (2.0 * delta)).exp();
        if tail > TAIL_TOLERANCE {
            return Err(Error::DomainTooSmall(format!(
                "packet at {x} has relative amplitude {tail:.2e} at the grid edge (limit {TAIL_TOLERANCE:.0e})"
            )));
        }
    }
    Ok(())
}

/// Gaussian packet sampled on `grid` and renormalized there.
pub fn gaussian_wavefunction(
    spec: &GaussianSpec,
    grid: &Grid1D,
    c: &PhysicalConstants,
) -> Result<WaveFunction> {
    spec.validate()?;
    check_tails(grid, &[spec.x], spec.delta)?;
    let samples = (0..grid.count())
        .map(|j| spec.amplitude(grid.value(j), c.hbar()))
        .collect();
    let mut psi = WaveFunction::new(*grid, samples, *c)?;
    psi.normalize()?;
    Ok(psi)
}

/// Normalized sum of zero-momentum packets of common `width`
/// (`delta = width^2`) centred at the given positions.
pub fn superposition_state(
    terms: &[(Complex64, f64)],
    width: f64,
    grid: &Grid1D,
    c: &PhysicalConstants,
) -> Result<WaveFunction> {
    if terms.is_empty() {
        return invalid("superposition needs at least one term");
    }
    if !(width >= 3.0 * grid.step() * (1.0 - 1e-12)) {
        return invalid(format!(
            "packet width {width} is below three grid steps ({})",
            3.0 * grid.step()
        ));
    }
    let delta = width * width;
    let centers: Vec<f64> = terms.iter().map(|t| t.1).collect();
    check_tails(grid, &centers, delta)?;
    let packets: Vec<GaussianSpec> = centers
        .iter()
        .map(|&x| GaussianSpec { x, k: 0.0, delta })
        .collect();
    let samples = (0..grid.count())
        .map(|j| {
            let q = grid.value(j);
            terms
                .iter()
                .zip(&packets)
                .map(|((amp, _), g)| amp * g.amplitude(q, c.hbar()))
                .sum()
        })
        .collect();
    let mut psi = WaveFunction::new(*grid, samples, *c)?;
    psi.normalize()?;
    Ok(psi)
}

/// Position-kernel density matrix.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    grid: Grid1D,
    entries: DMatrix<Complex64>,
    constants: PhysicalConstants,
}

impl DensityMatrix {
    /// Wrap kernel entries; invariants are checked separately by [`DensityMatrix::validate`].
    pub fn new(grid: Grid1D, entries: DMatrix<Complex64>, constants: PhysicalConstants) -> Result<Self> {
        if entries.nrows() != grid.count() || entries.ncols() != grid.count() {
            return invalid(format!(
                "density matrix is {}x{} on a grid of {} points",
                entries.nrows(),
                entries.ncols(),
                grid.count()
            ));
        }
        Ok(Self {
            grid,
            entries,
            constants,
        })
    }

    /// Convex mixture `sum w_i |psi_i><psi_i|`.
    pub fn mixture(states: &[(f64, &WaveFunction)]) -> Result<Self> {
        let Some((_, first)) = states.first() else {
            return invalid("empty mixture");
        };
        let n = first.grid.count();
        let mut entries = DMatrix::zeros(n, n);
        for (w, psi) in states {
            if psi.grid.count() != n {
                return invalid("mixture components on different grids");
            }
            first.constants.check_same(&psi.constants)?;
            for j in 0..n {
                for l in 0..n {
                    entries[(j, l)] += *w * psi.samples[j] * psi.samples[l].conj();
                }
            }
        }
        Self::new(first.grid, entries, first.constants)
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

    /// `step * sum_j rho[j][j]`.
    pub fn trace(&self) -> Complex64 {
        self.entries.trace() * self.grid.step()
    }

    pub fn hermitian_defect(&self) -> f64 {
        let n = self.grid.count();
        let mut worst = 0.0f64;
        for j in 0..n {
            for l in j..n {
                worst = worst.max((self.entries[(j, l)] - self.entries[(l, j)].conj()).norm());
            }
        }
        worst
    }

    /// Eigenvalues of the operator (`step * entries`), ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let m = &self.entries * Complex64::new(self.grid.step(), 0.0);
        let hermitian = (&m + m.adjoint()) * Complex64::new(0.5, 0.0);
        let mut ev: Vec<f64> = SymmetricEigen::new(hermitian).eigenvalues.iter().copied().collect();
        ev.sort_by(|a, b| a.total_cmp(b));
        ev
    }

    /// Check Hermiticity, unit trace and positivity.
    pub fn validate(&self) -> Result<()> {
        let h = self.hermitian_defect();
        if h > 1e-12 {
            return invalid(format!("density matrix is not Hermitian (defect {h:.2e})"));
        }
        let t = self.trace();
        if (t - 1.0).norm() > 1e-10 {
            return invalid(format!("density matrix trace is {t}, expected 1"));
        }
        let min = self.eigenvalues()[0];
        if min < -1e-10 {
            return invalid(format!("density matrix has negative eigenvalue {min:.2e}"));
        }
        Ok(())
    }

    /// Largest `|entry difference|`.
    pub fn max_abs_diff(&self, other: &DensityMatrix) -> f64 {
        (&self.entries - &other.entries)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }
}

/// `rho[j][l] = psi[j] conj(psi[l])`.
pub fn density_from_wavefunction(psi: &WaveFunction) -> DensityMatrix {
    let n = psi.grid.count();
    let entries = DMatrix::from_fn(n, n, |j, l| psi.samples[j] * psi.samples[l].conj());
    DensityMatrix {
        grid: psi.grid,
        entries,
        constants: psi.constants,
    }
}

/// `Tr rho^2 = step^2 * sum |rho[j][l]|^2`.
pub fn purity(rho: &DensityMatrix) -> f64 {
    let h = rho.grid.step();
    h * h * rho.entries.iter().map(|z| z.norm_sqr()).sum::<f64>()
}
