//! Closed-form complex Gaussians on the `(eta, xi)` plane.
//!
//! A [`GaussianForm`] is `c0 * exp(l . v + v^T Q v)` with `v = (eta, xi)`.
//! The family is closed under linear substitutions of `v` and under
//! multiplication by exponentials of linear and quadratic polynomials, which
//! covers the Gaussian ambiguity function, constant-force evolution and
//! linear canonical maps. Derivatives at the origin are exact.

use num_complex::Complex64;

use crate::error::Result;
use crate::field::ComplexField;
use crate::grid::{PhaseGrid, PhysicalConstants};
use crate::states::GaussianSpec;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianForm {
    pub c0: Complex64,
    pub l: [Complex64; 2],
    /// Symmetric quadratic coefficients `[[q_ee, q_ex], [q_ex, q_xx]]`.
    pub q: [[Complex64; 2]; 2],
}

impl GaussianForm {
    pub fn exponent(&self, eta: f64, xi: f64) -> Complex64 {
        self.l[0] * eta
            + self.l[1] * xi
            + self.q[0][0] * eta * eta
            + 2.0 * self.q[0][1] * eta * xi
            + self.q[1][1] * xi * xi
    }

    pub fn value(&self, eta: f64, xi: f64) -> Complex64 {
        self.c0 * self.exponent(eta, xi).exp()
    }

    /// `v -> M v` inside the argument: returns `g(v) = self(M v)`.
    pub fn substitute(&self, m: [[f64; 2]; 2]) -> Self {
        let l = [
            self.l[0] * m[0][0] + self.l[1] * m[1][0],
            self.l[0] * m[0][1] + self.l[1] * m[1][1],
        ];
        // M^T Q M
        let mut q = [[Complex64::new(0.0, 0.0); 2]; 2];
        for (a, row) in q.iter_mut().enumerate() {
            for (b, out) in row.iter_mut().enumerate() {
                for i in 0..2 {
                    for j in 0..2 {
                        *out += m[i][a] * self.q[i][j] * m[j][b];
                    }
                }
            }
        }
        Self { c0: self.c0, l, q }
    }

    /// Multiply by `exp(l . v + v^T Q v)`.
    pub fn multiply_exp(&self, l: [Complex64; 2], q: [[Complex64; 2]; 2]) -> Self {
        let mut out = *self;
        for a in 0..2 {
            out.l[a] += l[a];
            for b in 0..2 {
                out.q[a][b] += q[a][b];
            }
        }
        out
    }

    /// `d^a/d eta^a d^b/d xi^b` at the origin.
    pub fn derivative_at_origin(&self, a: usize, b: usize) -> Complex64 {
        // coefficient of eta^a xi^b in exp(f), times a! b!
        let deg = a + b;
        let mut f = Series::zero(deg);
        f.set(1, 0, self.l[0]);
        f.set(0, 1, self.l[1]);
        f.set(2, 0, self.q[0][0]);
        f.set(1, 1, 2.0 * self.q[0][1]);
        f.set(0, 2, self.q[1][1]);
        let mut exp = Series::zero(deg);
        exp.set(0, 0, Complex64::new(1.0, 0.0));
        let mut power = exp.clone();
        let mut factorial = 1.0;
        for n in 1..=deg {
            power = power.mul(&f);
            factorial *= n as f64;
            exp.add_scaled(&power, 1.0 / factorial);
        }
        self.c0 * exp.get(a, b) * (factorial_f64(a) * factorial_f64(b))
    }

    pub fn sample(&self, grid: PhaseGrid, c: PhysicalConstants) -> ComplexField {
        ComplexField::from_fn(grid, c, |e, x| self.value(e, x))
    }
}

fn factorial_f64(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Truncated bivariate power series, total degree `<= deg`.
#[derive(Clone)]
struct Series {
    deg: usize,
    c: Vec<Complex64>,
}

impl Series {
    fn zero(deg: usize) -> Self {
        Self {
            deg,
            c: vec![Complex64::new(0.0, 0.0); (deg + 1) * (deg + 1)],
        }
    }

    fn idx(&self, a: usize, b: usize) -> usize {
        a * (self.deg + 1) + b
    }

    fn get(&self, a: usize, b: usize) -> Complex64 {
        self.c[self.idx(a, b)]
    }

    fn set(&mut self, a: usize, b: usize, v: Complex64) {
        if a + b <= self.deg {
            let i = self.idx(a, b);
            self.c[i] = v;
        }
    }

    fn add_scaled(&mut self, other: &Series, s: f64) {
        for (x, y) in self.c.iter_mut().zip(&other.c) {
            *x += y * s;
        }
    }

    fn mul(&self, other: &Series) -> Series {
        let mut out = Series::zero(self.deg);
        for a1 in 0..=self.deg {
            for b1 in 0..=self.deg - a1 {
                let x = self.get(a1, b1);
                if x == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for a2 in 0..=self.deg - a1 - b1 {
                    for b2 in 0..=self.deg - a1 - b1 - a2 {
                        let i = out.idx(a1 + a2, b1 + b2);
                        out.c[i] += x * other.get(a2, b2);
                    }
                }
            }
        }
        out
    }
}

/// Closed-form ambiguity function of a Gaussian packet:
/// `(2 pi hbar)^(-1/2) exp(i(eta x + xi k)/hbar) exp(-eta^2 delta/(4 hbar^2) - xi^2/(4 delta))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmbiguityClosedFormGaussian {
    pub spec: GaussianSpec,
    pub constants: PhysicalConstants,
}

impl AmbiguityClosedFormGaussian {
    pub fn value(&self, eta: f64, xi: f64) -> Complex64 {
        self.form().value(eta, xi)
    }

    pub fn form(&self) -> GaussianForm {
        let h = self.constants.hbar();
        let GaussianSpec { x, k, delta } = self.spec;
        let zero = Complex64::new(0.0, 0.0);
        GaussianForm {
            c0: Complex64::new(1.0 / self.constants.seed_norm(), 0.0),
            l: [Complex64::new(0.0, x / h), Complex64::new(0.0, k / h)],
            q: [
                [Complex64::new(-delta / (4.0 * h * h), 0.0), zero],
                [zero, Complex64::new(-1.0 / (4.0 * delta), 0.0)],
            ],
        }
    }

    pub fn sample(&self, grid: PhaseGrid) -> ComplexField {
        self.form().sample(grid, self.constants)
    }
}

pub fn gaussian_ambiguity_closed(
    spec: &GaussianSpec,
    c: &PhysicalConstants,
) -> Result<AmbiguityClosedFormGaussian> {
    spec.validate()?;
    Ok(AmbiguityClosedFormGaussian {
        spec: *spec,
        constants: *c,
    })
}
