//! Transforms between position-kernel density matrices, ambiguity fields and
//! Wigner fields.
//!
//! Conventions (one table, used everywhere):
//!
//! | quantity | definition |
//! |---|---|
//! | ambiguity | `A(eta, xi) = Tr{rho Theta}`, `Theta = exp(i(eta q + xi p)/hbar) / sqrt(2 pi hbar)` |
//! | position form | `A = (2 pi hbar)^(-1/2) int dc exp(i eta c/hbar) rho(c + xi/2, c - xi/2)` |
//! | Wigner, position form | `W = (2 pi hbar)^(-1) int dxi exp(-i p xi/hbar) rho(q + xi/2, q - xi/2)` |
//! | ambiguity to Wigner | `W = (2 pi hbar)^(-3/2) int exp(-i(eta q + xi p)/hbar) A` |
//! | Wigner to ambiguity | `A = (2 pi hbar)^(-1/2) int exp(+i(eta q + xi p)/hbar) W` |
//!
//! `xi` is sampled at integer multiples `sigma * h` of the position step, so
//! `rho(c + xi/2, c - xi/2)` is always the exact matrix entry
//! `rho[l + sigma][l]` with centre `c = q_l + sigma h / 2`.
//!
//! The position grid is read as periodic, matching the spectral momentum
//! operator: row indices `l + sigma` outside the grid wrap modulo `N`. The
//! `N` columns `sigma` then cover every separation exactly once and the
//! transform is a bijection on `N x N` kernels. Translation-invariant
//! (circulant) kernels land on the `eta = 0` row alone.

use nalgebra::DMatrix;
use ndarray::Array2;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::field::{ComplexField, FieldKind};
use crate::fourier::{Dft, Sign};
use crate::grid::{conjugate_grid, Anchor, Grid1D, PhaseGrid};
use crate::states::DensityMatrix;

pub use crate::gaussian::{gaussian_ambiguity_closed, AmbiguityClosedFormGaussian};

/// Axis integrated out by [`marginal`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MarginalAxis {
    Eta,
    Xi,
}

fn columns_to_array(cols: Vec<Vec<Complex64>>, n1: usize) -> Array2<Complex64> {
    let n2 = cols.len();
    Array2::from_shape_fn((n1, n2), |(a, s)| cols[s][a])
}

/// Integer shift `sigma` of column `s` on an origin-anchored xi axis.
#[inline]
fn shift_of(xi: &Grid1D, s: usize) -> i64 {
    s as i64 - (xi.count() / 2) as i64
}

#[inline]
fn entry_wrapped(m: &DMatrix<Complex64>, j: i64, l: usize) -> Complex64 {
    m[(j.rem_euclid(m.nrows() as i64) as usize, l)]
}

#[inline]
fn entry_at(m: &DMatrix<Complex64>, j: i64, l: i64) -> Complex64 {
    let n = m.nrows() as i64;
    if j < 0 || l < 0 || j >= n || l >= n {
        Complex64::new(0.0, 0.0)
    } else {
        m[(j as usize, l as usize)]
    }
}

/// Ambiguity function of a density matrix (or any operator kernel) on
/// [`PhaseGrid::ambiguity_for`] of its position grid.
pub fn ambiguity_from_density(rho: &DensityMatrix) -> Result<ComplexField> {
    let q = *rho.grid();
    if q.anchor() != Anchor::Symmetric {
        return invalid("density matrices must live on a symmetric position grid");
    }
    let c = *rho.constants();
    let grid = PhaseGrid::ambiguity_for(&q, &c);
    let n = q.count();
    let h = q.step();
    let hbar = c.hbar();
    let dft = Dft::new(n);
    let scale = h / c.seed_norm();
    let entries = rho.entries();
    let cols: Vec<Vec<Complex64>> = (0..n)
        .into_par_iter()
        .map(|s| {
            let sigma = shift_of(&grid.axis2, s);
            let mut buf: Vec<Complex64> = (0..n)
                .map(|l| entry_wrapped(entries, l as i64 + sigma, l) * scale)
                .collect();
            let c0 = q.first() + sigma as f64 * h / 2.0;
            dft.apply(&mut buf, c0, h, grid.axis1.first(), Sign::Plus, hbar);
            buf
        })
        .collect();
    ComplexField::new(grid, columns_to_array(cols, n), c)
}

/// Inverse of [`ambiguity_from_density`].
pub fn reconstruct_density(a: &ComplexField) -> Result<DensityMatrix> {
    a.expect_kind(FieldKind::Ambiguity)?;
    let c = *a.constants();
    let grid = *a.grid();
    let n = grid.axis1.count();
    if grid.axis2.count() != n || grid.axis1.anchor() != Anchor::Origin || grid.axis2.anchor() != Anchor::Origin {
        return invalid("ambiguity grid is not a square origin-anchored grid");
    }
    let q = Grid1D::centered(n, grid.axis2.step())?;
    if !conjugate_grid(&q, &c).same_shape(&Grid1D::centered(n, grid.axis1.step())?) {
        return invalid("eta and xi axes are not Fourier conjugate to a common position grid");
    }
    let h = q.step();
    let dft = Dft::new(n);
    let scale = c.seed_norm() / (h * n as f64);
    let values = a.values();
    let cols: Vec<(i64, Vec<Complex64>)> = (0..n)
        .into_par_iter()
        .map(|s| {
            let sigma = shift_of(&grid.axis2, s);
            let mut buf: Vec<Complex64> = (0..n).map(|i| values[[i, s]] * scale).collect();
            let c0 = q.first() + sigma as f64 * h / 2.0;
            dft.apply(&mut buf, grid.axis1.first(), grid.axis1.step(), c0, Sign::Minus, c.hbar());
            (sigma, buf)
        })
        .collect();
    let mut entries = DMatrix::zeros(n, n);
    for (sigma, buf) in &cols {
        for (l, z) in buf.iter().enumerate() {
            entries[((l as i64 + sigma).rem_euclid(n as i64) as usize, l)] = *z;
        }
    }
    DensityMatrix::new(q, entries, c)
}

/// `rho(x + h/2, y + h/2)` by spectral interpolation along both arguments.
fn half_step_shift(rho: &DensityMatrix) -> DMatrix<Complex64> {
    let q = rho.grid();
    let c = rho.constants();
    let n = q.count();
    let p0 = conjugate_grid(q, c).first();
    let hbar = c.hbar();
    let half = q.step() / 2.0;
    let dft = Dft::new(n);
    let mult = |k: f64| Complex64::from_polar(1.0, k * half / hbar);
    let mut m = rho.entries().clone();
    for mut col in m.column_iter_mut() {
        let mut buf: Vec<Complex64> = col.iter().copied().collect();
        dft.spectral_multiply(&mut buf, q.first(), q.step(), p0, hbar, mult);
        col.iter_mut().zip(buf).for_each(|(z, v)| *z = v);
    }
    for mut row in m.row_iter_mut() {
        let mut buf: Vec<Complex64> = row.iter().copied().collect();
        dft.spectral_multiply(&mut buf, q.first(), q.step(), p0, hbar, mult);
        row.iter_mut().zip(buf).for_each(|(z, v)| *z = v);
    }
    m
}

/// Wigner function on [`PhaseGrid::wigner_for`] of the position grid.
///
/// Even xi shifts read matrix entries directly; odd shifts need
/// `rho(q_j + (2m+1)h/2, q_j - (2m+1)h/2)`, read from the half-step
/// translated kernel `rho_half[j+m][j-m-1]`.
pub fn wigner_from_density(rho: &DensityMatrix) -> Result<ComplexField> {
    let q = *rho.grid();
    if q.anchor() != Anchor::Symmetric {
        return invalid("density matrices must live on a symmetric position grid");
    }
    let c = *rho.constants();
    let grid = PhaseGrid::wigner_for(&q, &c);
    let n = q.count();
    let h = q.step();
    let half = half_step_shift(rho);
    let entries = rho.entries();
    let dft = Dft::new(n);
    let scale = h / (c.seed_norm() * c.seed_norm());
    let xi0 = -((n / 2) as f64) * h;
    let rows: Vec<Vec<Complex64>> = (0..n)
        .into_par_iter()
        .map(|j| {
            let j = j as i64;
            let mut buf: Vec<Complex64> = (0..n)
                .map(|s| {
                    let sigma = s as i64 - (n / 2) as i64;
                    let v = if sigma.rem_euclid(2) == 0 {
                        let m = sigma / 2;
                        entry_at(entries, j + m, j - m)
                    } else {
                        let m = (sigma - 1) / 2;
                        entry_at(&half, j + m, j - m - 1)
                    };
                    v * scale
                })
                .collect();
            dft.apply(&mut buf, xi0, h, grid.axis2.first(), Sign::Minus, c.hbar());
            buf
        })
        .collect();
    let values = Array2::from_shape_fn((n, n), |(j, b)| rows[j][b]);
    ComplexField::new(grid, values, c)
}

/// Wigner function at a single point. `q` must be a grid point or a midpoint
/// between grid points; `p` is arbitrary. The xi quadrature has step `2h`
/// so both arguments of `rho` stay on the grid.
pub fn wigner_at(rho: &DensityMatrix, q: f64, p: f64) -> Result<Complex64> {
    let g = rho.grid();
    let h = g.step();
    let twice = 2.0 * (q / h + g.offset());
    let t = twice.round();
    if (twice - t).abs() > 1e-9 || t < 0.0 || t > 2.0 * (g.count() as f64 - 1.0) {
        return invalid(format!("q = {q} is not on the position half-lattice"));
    }
    // q = (q_j + q_l)/2 with j + l = t; step through j - l = t mod 2, +2, ...
    let t = t as i64;
    let n = g.count() as i64;
    let hbar = rho.constants().hbar();
    let entries = rho.entries();
    let mut sum = Complex64::new(0.0, 0.0);
    let mut d = -(n - 1);
    while d <= n - 1 {
        if (t + d).rem_euclid(2) == 0 {
            let j = (t + d) / 2;
            let l = (t - d) / 2;
            let xi = d as f64 * h;
            sum += entry_at(entries, j, l) * Complex64::from_polar(1.0, -p * xi / hbar);
        }
        d += 1;
    }
    let c = rho.constants();
    Ok(sum * 2.0 * h / (c.seed_norm() * c.seed_norm()))
}

fn transform_axes(
    values: &Array2<Complex64>,
    from: &PhaseGrid,
    to: &PhaseGrid,
    sign: Sign,
    hbar: f64,
) -> Array2<Complex64> {
    let (n1, n2) = values.dim();
    let d1 = Dft::new(n1);
    let d2 = Dft::new(n2);
    let cols: Vec<Vec<Complex64>> = (0..n2)
        .into_par_iter()
        .map(|b| {
            let mut buf: Vec<Complex64> = (0..n1).map(|a| values[[a, b]]).collect();
            d1.apply(&mut buf, from.axis1.first(), from.axis1.step(), to.axis1.first(), sign, hbar);
            buf
        })
        .collect();
    let rows: Vec<Vec<Complex64>> = (0..n1)
        .into_par_iter()
        .map(|a| {
            let mut buf: Vec<Complex64> = (0..n2).map(|b| cols[b][a]).collect();
            d2.apply(&mut buf, from.axis2.first(), from.axis2.step(), to.axis2.first(), sign, hbar);
            buf
        })
        .collect();
    Array2::from_shape_fn((n1, n2), |(a, b)| rows[a][b])
}

pub fn ambiguity_to_wigner(a: &ComplexField) -> Result<ComplexField> {
    a.expect_kind(FieldKind::Ambiguity)?;
    let c = *a.constants();
    let to = a.grid().fourier_dual(&c);
    let s = c.seed_norm();
    let scale = a.grid().cell_area() / (s * s * s);
    let values = transform_axes(a.values(), a.grid(), &to, Sign::Minus, c.hbar()) * scale;
    ComplexField::new(to, values, c)
}

pub fn wigner_to_ambiguity(w: &ComplexField) -> Result<ComplexField> {
    w.expect_kind(FieldKind::Wigner)?;
    let c = *w.constants();
    let to = w.grid().fourier_dual(&c);
    let scale = w.grid().cell_area() / c.seed_norm();
    let values = transform_axes(w.values(), w.grid(), &to, Sign::Plus, c.hbar()) * scale;
    ComplexField::new(to, values, c)
}

/// Single-axis integral of an ambiguity field.
///
/// `Eta`: `m(xi) = (2 pi hbar)^(-1/2) int deta A = <q = xi/2| rho |q = -xi/2>`,
/// indexed like the xi axis. `Xi`: `m(eta) = (2 pi hbar)^(-1/2) int dxi A =
/// <p = -eta/2| rho |p = eta/2>`, indexed like the eta axis.
pub fn marginal(a: &ComplexField, axis: MarginalAxis) -> Result<Vec<Complex64>> {
    a.expect_kind(FieldKind::Ambiguity)?;
    let g = a.grid();
    let norm = a.constants().seed_norm();
    let v = a.values();
    Ok(match axis {
        MarginalAxis::Eta => v
            .columns()
            .into_iter()
            .map(|col| col.sum() * g.axis1.step() / norm)
            .collect(),
        MarginalAxis::Xi => v
            .rows()
            .into_iter()
            .map(|row| row.sum() * g.axis2.step() / norm)
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_centered_grid, PhysicalConstants};
    use crate::states::{density_from_wavefunction, gaussian_wavefunction, superposition_state, GaussianSpec};
    use std::f64::consts::PI;

    fn gauss_rho(n: usize, h: f64, x: f64, k: f64, d: f64) -> DensityMatrix {
        let g = make_centered_grid(n, h).unwrap();
        let psi = gaussian_wavefunction(&GaussianSpec::new(x, k, d).unwrap(), &g, &PhysicalConstants::default()).unwrap();
        density_from_wavefunction(&psi)
    }

    #[test]
    fn origin_value_is_trace() {
        let rho = gauss_rho(128, 0.15, 0.0, 0.0, 1.0);
        let a = ambiguity_from_density(&rho).unwrap();
        assert!((a.at_origin().unwrap().re - 0.3989423).abs() < 1e-7);
        assert!(a.hermitian_defect() < 1e-12);
    }

    #[test]
    fn matches_closed_form() {
        let rho = gauss_rho(128, 0.15, 0.5, -1.0, 0.8);
        let a = ambiguity_from_density(&rho).unwrap();
        let cf = gaussian_ambiguity_closed(&GaussianSpec::new(0.5, -1.0, 0.8).unwrap(), rho.constants()).unwrap();
        let want = cf.sample(*a.grid());
        assert!(a.max_abs_diff(&want).unwrap() < 1e-9);
    }

    #[test]
    fn round_trip_reconstruction() {
        let rho = gauss_rho(96, 0.2, 0.3, 0.7, 1.2);
        let back = reconstruct_density(&ambiguity_from_density(&rho).unwrap()).unwrap();
        // pairs separated by more than half the domain are not sampled
        assert!(back.max_abs_diff(&rho) < 1e-8);

        let g = make_centered_grid(128, 0.1).unwrap();
        let c = PhysicalConstants::default();
        let psi = superposition_state(
            &[(Complex64::new(1.0, 0.0), -2.0), (Complex64::new(0.0, 1.0), 2.0)],
            0.3,
            &g,
            &c,
        )
        .unwrap();
        let rho = density_from_wavefunction(&psi);
        let back = reconstruct_density(&ambiguity_from_density(&rho).unwrap()).unwrap();
        assert!(back.max_abs_diff(&rho) < 1e-6);
    }

    #[test]
    fn diagonal_operator_round_trip() {
        let g = make_centered_grid(64, 0.25).unwrap();
        let c = PhysicalConstants::default();
        let entries = DMatrix::from_fn(64, 64, |j, l| {
            if j == l {
                Complex64::new(1.0 / 16.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        let rho = DensityMatrix::new(g, entries, c).unwrap();
        let back = reconstruct_density(&ambiguity_from_density(&rho).unwrap()).unwrap();
        assert!(back.max_abs_diff(&rho) < 1e-12);
    }

    #[test]
    fn wigner_gaussian_origin_and_integral() {
        let rho = gauss_rho(129, 0.15, 0.0, 0.0, 1.0);
        let w = wigner_from_density(&rho).unwrap();
        let mid = w.grid().axis1.zero_index().unwrap();
        let pm = w.grid().axis2.zero_index().unwrap();
        assert!((w.values()[[mid, pm]].re - 1.0 / PI).abs() < 1e-10);
        assert!((w.integral().re - 1.0).abs() < 1e-10);
        assert!(w.max_imag() < 1e-12);
    }

    #[test]
    fn wigner_matches_closed_form_everywhere() {
        let rho = gauss_rho(128, 0.15, 0.4, 1.1, 0.9);
        let w = wigner_from_density(&rho).unwrap();
        let c = rho.constants();
        let want = ComplexField::from_fn(*w.grid(), *c, |q, p| {
            let v = (-(q - 0.4f64).powi(2) / 0.9 - (p - 1.1f64).powi(2) * 0.9).exp() / PI;
            Complex64::new(v, 0.0)
        });
        assert!(w.max_abs_diff(&want).unwrap() < 1e-9);
    }

    #[test]
    fn wigner_point_evaluator() {
        let rho = gauss_rho(256, 0.1, 1.0, 2.0, 1.0);
        let v = wigner_at(&rho, 1.0, 2.0).unwrap();
        assert!((v.re - 1.0 / PI).abs() < 1e-10 && v.im.abs() < 1e-12);
        let off = wigner_at(&rho, 0.35, 1.3).unwrap();
        let want = (-(0.65f64).powi(2) - 0.7f64.powi(2)).exp() / PI;
        assert!((off.re - want).abs() < 1e-10);
        assert!(wigner_at(&rho, 0.33, 0.0).is_err());
    }

    #[test]
    fn fourier_bridge() {
        let rho = gauss_rho(128, 0.15, -0.5, 0.8, 1.1);
        let a = ambiguity_from_density(&rho).unwrap();
        let w1 = ambiguity_to_wigner(&a).unwrap();
        let w2 = wigner_from_density(&rho).unwrap();
        assert!(w1.max_abs_diff(&w2).unwrap() < 1e-9);
        let back = wigner_to_ambiguity(&w1).unwrap();
        assert!(back.max_abs_diff(&a).unwrap() < 1e-13);
    }

    #[test]
    fn delta_ambiguity_gives_constant_wigner() {
        let c = PhysicalConstants::default();
        let q = make_centered_grid(32, 0.3).unwrap();
        let grid = PhaseGrid::ambiguity_for(&q, &c);
        let mut a = ComplexField::zeros(grid, c);
        let (i, j) = (grid.axis1.zero_index().unwrap(), grid.axis2.zero_index().unwrap());
        a.values_mut()[[i, j]] = Complex64::new(1.0, 0.0);
        let w = ambiguity_to_wigner(&a).unwrap();
        let v0 = w.values()[[0, 0]];
        assert!(w.values().iter().all(|z| (z - v0).norm() < 1e-14));
    }

    #[test]
    fn marginals_match_matrix_elements() {
        let rho = gauss_rho(128, 0.15, 0.0, 0.0, 1.0);
        let a = ambiguity_from_density(&rho).unwrap();
        let m = marginal(&a, MarginalAxis::Eta).unwrap();
        let n = 128;
        for s in 0..n {
            let sigma = s as i64 - 64;
            if sigma.rem_euclid(2) == 1 {
                let j = ((sigma + n as i64 - 1) / 2) as usize;
                let direct = rho.entries()[(j, n - 1 - j)];
                assert!((m[s] - direct).norm() < 1e-10);
            }
        }
        let mx = marginal(&a, MarginalAxis::Xi).unwrap();
        let psi = {
            let g = make_centered_grid(128, 0.15).unwrap();
            gaussian_wavefunction(&GaussianSpec::new(0.0, 0.0, 1.0).unwrap(), &g, &PhysicalConstants::default()).unwrap()
        };
        for (i, v) in mx.iter().enumerate() {
            let eta = a.grid().axis1.value(i);
            let direct = psi.momentum_amplitude(-eta / 2.0) * psi.momentum_amplitude(eta / 2.0).conj();
            assert!((v - direct).norm() < 1e-10);
        }
    }
}
