//! Finite-dimensional Weyl-Heisenberg displacements.
//!
//! `D(m, n) = tau^(m n) X^m Z^n` on `C^d` with `X|j> = |j+1 mod d>`,
//! `Z|j> = omega^j |j>`, `omega = exp(2 pi i/d)`, `tau = exp(i pi/d)`.
//! Here the operator identities of the continuum hold exactly:
//!
//! ```text
//! Tr{D(m,n) D(m',n')^dag}   = d delta_mm' delta_nn'
//! D(m1,n1) D(m2,n2)         = tau^(n1 m2 - m1 n2) D(m1+m2, n1+n2)     (unreduced)
//! D(m + a d, n + b d)       = (-1)^(m b + a n + a b d) D(m, n)
//! (1/2d) sum_{0 <= m,n < 2d} D(m,n) = parity, |j> -> |-j mod d>
//! D(m,n) X^a Z^b D(m,n)^dag = omega^(n a - m b) X^a Z^b
//! ```
//!
//! `tau` has order `2d`, so formulas that add indices are evaluated on
//! unreduced integers and the wraparound sign is applied explicitly.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::f64::consts::PI;

use crate::error::{invalid, Result};
use crate::oracle::CheckResult;

/// Tolerance of every identity in [`verify_discrete_identities`].
pub const DISCRETE_TOLERANCE: f64 = 1e-12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// `tau^k` with the exponent reduced exactly modulo `2d`.
fn tau_pow(d: usize, k: i64) -> Complex64 {
    let r = k.rem_euclid(2 * d as i64);
    Complex64::from_polar(1.0, PI * r as f64 / d as f64)
}

/// `(-1)^(m b + a n + a b d)` relating `D(m + a d, n + b d)` to `D(m, n)`.
pub fn wrap_sign(d: usize, m: i64, n: i64, a: i64, b: i64) -> f64 {
    if (m * b + a * n + a * b * d as i64).rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteDisplacement {
    dim: usize,
    m: usize,
    n: usize,
    matrix: DMatrix<Complex64>,
}

impl DiscreteDisplacement {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn indices(&self) -> (usize, usize) {
        (self.m, self.n)
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.matrix
    }
}

/// `D(m, n)` with indices normalized into `0..d`.
pub fn discrete_displacement(d: usize, m: i64, n: i64) -> Result<DiscreteDisplacement> {
    if d < 2 {
        return invalid(format!("dimension must be at least 2, got {d}"));
    }
    let (mr, nr) = (m.rem_euclid(d as i64) as usize, n.rem_euclid(d as i64) as usize);
    Ok(DiscreteDisplacement {
        dim: d,
        m: mr,
        n: nr,
        matrix: unreduced_matrix(d, mr as i64, nr as i64),
    })
}

/// `tau^(m n) X^m Z^n` for arbitrary integers, without reducing the phase.
fn unreduced_matrix(d: usize, m: i64, n: i64) -> DMatrix<Complex64> {
    let mut out = DMatrix::zeros(d, d);
    for j in 0..d {
        let row = (j as i64 + m).rem_euclid(d as i64) as usize;
        out[(row, j)] = tau_pow(d, m * n + 2 * n * j as i64);
    }
    out
}

/// Table `T[m][n] = Tr{A D(m,n)^dag} / sqrt(d)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteAmbiguity {
    dim: usize,
    table: DMatrix<Complex64>,
}

impl DiscreteAmbiguity {
    pub fn new(table: DMatrix<Complex64>) -> Result<Self> {
        if table.nrows() != table.ncols() || table.nrows() < 2 {
            return invalid("discrete ambiguity table must be square with d >= 2");
        }
        Ok(Self {
            dim: table.nrows(),
            table,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn table(&self) -> &DMatrix<Complex64> {
        &self.table
    }

    pub fn get(&self, m: i64, n: i64) -> Complex64 {
        let d = self.dim as i64;
        self.table[(m.rem_euclid(d) as usize, n.rem_euclid(d) as usize)]
    }
}

/// Sparse view of a displacement: column `j` holds `value[j]` in row `row[j]`.
#[derive(Debug, Clone, PartialEq)]
struct Monomial {
    row: Vec<usize>,
    value: Vec<Complex64>,
}

impl Monomial {
    /// Reads the structure off a dense matrix; `None` if any column has
    /// other than one nonzero entry.
    fn from_dense(a: &DMatrix<Complex64>) -> Option<Self> {
        let d = a.ncols();
        let mut row = Vec::with_capacity(d);
        let mut value = Vec::with_capacity(d);
        for j in 0..d {
            let mut found = None;
            for i in 0..d {
                if a[(i, j)] != ZERO {
                    if found.is_some() {
                        return None;
                    }
                    found = Some(i);
                }
            }
            let i = found?;
            row.push(i);
            value.push(a[(i, j)]);
        }
        Some(Self { row, value })
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        let (row, value) = other
            .row
            .iter()
            .zip(&other.value)
            .map(|(&k, &v)| (self.row[k], self.value[k] * v))
            .unzip();
        Monomial { row, value }
    }

    fn adjoint(&self) -> Monomial {
        let d = self.row.len();
        let mut row = vec![0; d];
        let mut value = vec![ZERO; d];
        for (j, (&i, v)) in self.row.iter().zip(&self.value).enumerate() {
            row[i] = j;
            value[i] = v.conj();
        }
        Monomial { row, value }
    }

    /// Max-norm distance to `phase * other`; infinite if supports differ.
    fn distance(&self, other: &Monomial, phase: Complex64) -> f64 {
        if self.row != other.row {
            return f64::INFINITY;
        }
        self.value
            .iter()
            .zip(&other.value)
            .map(|(a, b)| (a - phase * b).norm())
            .fold(0.0, f64::max)
    }

    /// Max-norm distance to the identity; infinite off the diagonal.
    fn identity_distance(&self) -> f64 {
        if self.row.iter().enumerate().any(|(j, &i)| i != j) {
            return f64::INFINITY;
        }
        self.value.iter().map(|v| (v - 1.0).norm()).fold(0.0, f64::max)
    }

    /// `Tr{self other^dag}`.
    fn trace_with_adjoint(&self, other: &Monomial) -> Complex64 {
        self.row
            .iter()
            .zip(&other.row)
            .zip(self.value.iter().zip(&other.value))
            .filter(|((a, b), _)| a == b)
            .map(|(_, (x, y))| x * y.conj())
            .sum()
    }

    /// `Tr{A self^dag}` for a dense `A`.
    fn dense_trace_with_adjoint(&self, a: &DMatrix<Complex64>) -> Complex64 {
        self.row
            .iter()
            .zip(&self.value)
            .enumerate()
            .map(|(j, (&i, v))| a[(i, j)] * v.conj())
            .sum()
    }
}

/// Sparse `tau^(m n) X^m Z^n`, same formula as [`unreduced_matrix`].
fn monomial(d: usize, m: i64, n: i64) -> Monomial {
    let di = d as i64;
    let row = (0..di).map(|j| (j + m).rem_euclid(di) as usize).collect();
    let value = (0..di).map(|j| tau_pow(d, m * n + 2 * n * j)).collect();
    Monomial { row, value }
}

fn check_dim(a: &DMatrix<Complex64>) -> Result<usize> {
    if a.nrows() != a.ncols() || a.nrows() < 2 {
        return invalid(format!("expected a square matrix with d >= 2, got {}x{}", a.nrows(), a.ncols()));
    }
    Ok(a.nrows())
}

pub fn discrete_ambiguity(a: &DMatrix<Complex64>) -> Result<DiscreteAmbiguity> {
    let d = check_dim(a)?;
    let norm = (d as f64).sqrt();
    let table = DMatrix::from_fn(d, d, |m, n| {
        monomial(d, m as i64, n as i64).dense_trace_with_adjoint(a) / norm
    });
    DiscreteAmbiguity::new(table)
}

/// `A = sum_{m,n} T[m][n] D(m,n) / sqrt(d)`.
pub fn reconstruct_discrete(t: &DiscreteAmbiguity) -> DMatrix<Complex64> {
    let d = t.dim;
    let norm = (d as f64).sqrt();
    let mut out = DMatrix::zeros(d, d);
    for m in 0..d {
        for n in 0..d {
            let c = t.table[(m, n)] / norm;
            let dm = monomial(d, m as i64, n as i64);
            for (j, (&i, v)) in dm.row.iter().zip(&dm.value).enumerate() {
                out[(i, j)] += c * v;
            }
        }
    }
    out
}

/// `sum T_A[m][n] conj(T_B[m][n]) = Tr{A B^dag}`.
pub fn discrete_trace_product(ta: &DiscreteAmbiguity, tb: &DiscreteAmbiguity) -> Result<Complex64> {
    if ta.dim != tb.dim {
        return invalid(format!("dimension mismatch: {} vs {}", ta.dim, tb.dim));
    }
    Ok(ta.table.iter().zip(tb.table.iter()).map(|(a, b)| a * b.conj()).sum())
}

/// Random Hermitian matrix with entries of order one.
pub fn random_hermitian(d: usize, seed: u64) -> DMatrix<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut a = DMatrix::zeros(d, d);
    for i in 0..d {
        a[(i, i)] = Complex64::new(rng.random_range(-1.0..1.0), 0.0);
        for j in 0..i {
            let z = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            a[(i, j)] = z;
            a[(j, i)] = z.conj();
        }
    }
    a
}

#[derive(Debug, Clone, Serialize)]
pub struct DiscreteReport {
    pub dim: usize,
    pub tolerance: f64,
    pub checks: Vec<CheckResult>,
    pub passed: bool,
}

impl DiscreteReport {
    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Brute-force verification of the exact identities in dimension `d`.
pub fn verify_discrete_identities(d: usize) -> Result<DiscreteReport> {
    verify_discrete_identities_seeded(d, 0x5eed + d as u64)
}

/// As [`verify_discrete_identities`], with the seed of the random Hermitian
/// matrix used for the Parseval, reconstruction and symmetry checks.
pub fn verify_discrete_identities_seeded(d: usize, seed: u64) -> Result<DiscreteReport> {
    if d < 2 {
        return invalid(format!("dimension must be at least 2, got {d}"));
    }
    let di = d as i64;
    let tol = DISCRETE_TOLERANCE;
    let mut structure = 0.0f64;
    let basis: Vec<Monomial> = (0..d * d)
        .map(|k| {
            let dense = discrete_displacement(d, (k / d) as i64, (k % d) as i64)
                .expect("d >= 2")
                .into_matrix();
            Monomial::from_dense(&dense).unwrap_or_else(|| {
                structure = f64::INFINITY;
                monomial(d, (k / d) as i64, (k % d) as i64)
            })
        })
        .collect();
    let at = |m: i64, n: i64| &basis[(m.rem_euclid(di) * di + n.rem_euclid(di)) as usize];
    let mut checks = vec![CheckResult::new("monomial_structure", structure, tol)];

    let unitarity = basis
        .iter()
        .map(|b| b.mul(&b.adjoint()).identity_distance())
        .fold(0.0, f64::max);
    checks.push(CheckResult::new("unitarity", unitarity, tol));

    // (i) Gram matrix; supports of D(m,n), D(m',n') are disjoint unless m = m'
    let mut ortho = 0.0f64;
    for m in 0..di {
        for n in 0..di {
            for np in 0..di {
                let want = if n == np { d as f64 } else { 0.0 };
                ortho = ortho.max((at(m, n).trace_with_adjoint(at(m, np)) - want).norm());
            }
            for mp in (0..di).filter(|&mp| mp != m) {
                if at(m, n).row.iter().zip(&at(mp, n).row).any(|(a, b)| a == b) {
                    ortho = f64::INFINITY;
                }
            }
        }
    }
    checks.push(CheckResult::new("orthogonality", ortho, tol));

    // (ii) composition on unreduced indices; the wraparound sign is checked
    // once for every unreduced pair that a sum of reduced indices can reach
    let tau: Vec<Complex64> = (0..2 * di).map(|k| tau_pow(d, k)).collect();
    let tau_at = |k: i64| tau[k.rem_euclid(2 * di) as usize];
    let mut comp = 0.0f64;
    for m1 in 0..di {
        for n1 in 0..di {
            let a = at(m1, n1);
            for m2 in 0..di {
                for n2 in 0..di {
                    let b = at(m2, n2);
                    let (ms, ns) = (m1 + m2, n1 + n2);
                    let phase = tau_at(n1 * m2 - m1 * n2);
                    let shift = ms as usize % d;
                    let period = 2 * d;
                    let step = (2 * ns).rem_euclid(2 * di) as usize;
                    let mut idx = (ms * ns).rem_euclid(2 * di) as usize;
                    for j in 0..d {
                        let k = b.row[j];
                        let row = if j + shift >= d { j + shift - d } else { j + shift };
                        let want = phase * tau[idx];
                        idx += step;
                        if idx >= period {
                            idx -= period;
                        }
                        let err = if a.row[k] == row {
                            (a.value[k] * b.value[j] - want).norm_sqr()
                        } else {
                            f64::INFINITY
                        };
                        comp = comp.max(err);
                    }
                }
            }
        }
    }
    checks.push(CheckResult::new("composition", comp.sqrt(), tol));
    let mut wrap = 0.0f64;
    for ms in 0..2 * di {
        for ns in 0..2 * di {
            let sign = wrap_sign(d, ms % di, ns % di, ms / di, ns / di);
            wrap = wrap.max(monomial(d, ms, ns).distance(at(ms, ns), Complex64::new(sign, 0.0)));
        }
    }
    checks.push(CheckResult::new("wraparound_sign", wrap, tol));

    // (iii) parity as the average over the 2d x 2d torus of unreduced indices
    let mut parity = DMatrix::<Complex64>::zeros(d, d);
    for m in 0..2 * di {
        for n in 0..2 * di {
            let b = monomial(d, m, n);
            for (j, (&i, v)) in b.row.iter().zip(&b.value).enumerate() {
                parity[(i, j)] += v;
            }
        }
    }
    parity /= Complex64::new(2.0 * d as f64, 0.0);
    let parity_err = (0..d)
        .flat_map(|i| (0..d).map(move |j| (i, j)))
        .map(|(i, j)| {
            let want = if (i + j) % d == 0 { 1.0 } else { 0.0 };
            (parity[(i, j)] - want).norm()
        })
        .fold(0.0, f64::max);
    checks.push(CheckResult::new("parity", parity_err, tol));

    // (iv) conjugation of clock/shift monomials X^a Z^b = tau^(-ab) D(a, b)
    let mut conj_err = 0.0f64;
    for m in 0..di {
        for n in 0..di {
            let dmn = at(m, n);
            let dadj = dmn.adjoint();
            for a in 0..di {
                for b in 0..di {
                    let x = at(a, b);
                    let phase = tau_at(2 * (n * a - m * b));
                    for j in 0..d {
                        let k1 = dadj.row[j];
                        let k2 = x.row[k1];
                        let v = dmn.value[k2] * x.value[k1] * dadj.value[j];
                        let err = if dmn.row[k2] == x.row[j] {
                            (v - phase * x.value[j]).norm_sqr()
                        } else {
                            f64::INFINITY
                        };
                        conj_err = conj_err.max(err);
                    }
                }
            }
        }
    }
    checks.push(CheckResult::new("conjugation", conj_err.sqrt(), tol));

    // Parseval, reconstruction and Hermitian symmetry on a random Hermitian matrix
    let a = random_hermitian(d, seed);
    let t = discrete_ambiguity(&a)?;
    let frob: f64 = a.iter().map(|z| z.norm_sqr()).sum();
    let parseval: f64 = t.table.iter().map(|z| z.norm_sqr()).sum();
    checks.push(CheckResult::new("parseval", (parseval - frob).abs() / frob.max(1.0), tol));
    let back = reconstruct_discrete(&t);
    let recon = (&back - &a).iter().map(|z| z.norm()).fold(0.0, f64::max);
    checks.push(CheckResult::new("reconstruction", recon, tol));
    let mut herm = 0.0f64;
    for m in 0..di {
        for n in 0..di {
            let (a1, b1) = (i64::from(m != 0), i64::from(n != 0));
            let sign = wrap_sign(d, -m + a1 * di, -n + b1 * di, -a1, -b1);
            herm = herm.max((t.get(m, n).conj() - t.get(-m, -n) * sign).norm());
        }
    }
    checks.push(CheckResult::new("hermitian_symmetry", herm, tol));

    let passed = checks.iter().all(|c| c.passed);
    Ok(DiscreteReport {
        dim: d,
        tolerance: tol,
        checks,
        passed,
    })
}
