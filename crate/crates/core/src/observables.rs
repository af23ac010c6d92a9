//! Observables in ambiguity space: polynomial operators, their compiled
//! derivative-at-origin descriptors, Bopp operators and the trace-product
//! quadrature.
//!
//! The ambiguity function of a word-ordered monomial is a finite combination
//! of derivatives of `delta(eta) delta(xi)`. Left multiplication by `q` or `p`
//! acts on ambiguity functions as
//!
//! * `Q = (hbar/i) d_eta + xi/2`
//! * `P = (hbar/i) d_xi - eta/2`
//!
//! and with `xi delta^(b)(xi) = -b delta^(b-1)(xi)` a letter maps the
//! coefficient of `d_eta^a d_xi^b delta delta` as
//! `Q: (a, b) -> (hbar/i) (a+1, b) - (b/2) (a, b-1)` and
//! `P: (a, b) -> (hbar/i) (a, b+1) + (a/2) (a-1, b)`.
//! Pairing with a state through `Tr{AB} = int A(eta, xi) B(-eta, -xi)` turns
//! each `d^a d^b delta` into `d^a d^b P(0, 0)`.

use num_complex::Complex64;
use num_rational::Rational64;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use crate::error::{invalid, Error, Result};
use crate::field::{ComplexField, FieldKind};
use crate::fourier::Dft;
use crate::gaussian::{AmbiguityClosedFormGaussian, GaussianForm};
use crate::grid::{PhaseGrid, PhysicalConstants};
use crate::stencil::{central_half_width, central_weights, DEFAULT_ACCURACY};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
pub enum Letter {
    Q,
    P,
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Letter::Q => "Q",
            Letter::P => "P",
        })
    }
}

/// `coefficient * word[0] word[1] ...` (left-to-right operator product).
#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub coefficient: Complex64,
    pub word: Vec<Letter>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PolynomialOperator {
    terms: Vec<Term>,
}

impl PolynomialOperator {
    pub fn new(terms: Vec<Term>) -> Self {
        Self { terms }
    }

    pub fn identity() -> Self {
        Self::monomial(Complex64::new(1.0, 0.0), &[])
    }

    pub fn monomial(coefficient: Complex64, word: &[Letter]) -> Self {
        Self {
            terms: vec![Term {
                coefficient,
                word: word.to_vec(),
            }],
        }
    }

    /// `P^2 / 2m - F Q`.
    pub fn constant_force_hamiltonian(mass: f64, force: f64) -> Self {
        Self::new(vec![
            Term {
                coefficient: Complex64::new(0.5 / mass, 0.0),
                word: vec![Letter::P, Letter::P],
            },
            Term {
                coefficient: Complex64::new(-force, 0.0),
                word: vec![Letter::Q],
            },
        ])
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn degree(&self) -> usize {
        self.terms.iter().map(|t| t.word.len()).max().unwrap_or(0)
    }

    pub fn scaled(&self, s: Complex64) -> Self {
        Self::new(
            self.terms
                .iter()
                .map(|t| Term {
                    coefficient: t.coefficient * s,
                    word: t.word.clone(),
                })
                .collect(),
        )
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Self::new(terms)
    }

    fn collected(&self) -> HashMap<Vec<Letter>, Complex64> {
        let mut map: HashMap<Vec<Letter>, Complex64> = HashMap::new();
        for t in &self.terms {
            *map.entry(t.word.clone()).or_default() += t.coefficient;
        }
        map
    }

    /// Hermitian iff reversing each word and conjugating its coefficient
    /// maps the (collected) term set onto itself.
    pub fn is_hermitian(&self) -> bool {
        let map = self.collected();
        let scale = map.values().map(|z| z.norm()).fold(1.0, f64::max);
        map.iter().all(|(w, c)| {
            let rev: Vec<Letter> = w.iter().rev().copied().collect();
            let other = map.get(&rev).copied().unwrap_or_default();
            (other - c.conj()).norm() <= 1e-12 * scale
        })
    }
}

impl fmt::Display for PolynomialOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            let c = t.coefficient;
            let parts: Vec<String> = match (c.re != 0.0, c.im != 0.0) {
                (_, false) => vec![format!("{:?}", c.re)],
                (false, true) => vec![format!("{:?}i", c.im)],
                (true, true) => vec![format!("{:?}", c.re), format!("{:?}i", c.im)],
            };
            for (k, part) in parts.iter().enumerate() {
                if k > 0 {
                    f.write_str(" + ")?;
                }
                f.write_str(part)?;
                for l in &t.word {
                    write!(f, "*{l}")?;
                }
            }
        }
        Ok(())
    }
}

/// Parses sums of products such as `0.5*P^2 - 3*Q`, `Q P Q` or `2i*Q*P`.
/// Factors are separated by `*` or whitespace; `i` is the imaginary unit.
impl FromStr for PolynomialOperator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut terms = Vec::new();
        let mut sign = 1.0;
        let mut current = String::new();
        let flush = |sign: f64, text: &str, terms: &mut Vec<Term>| -> Result<()> {
            if text.trim().is_empty() {
                return invalid(format!("empty term in operator '{s}'"));
            }
            terms.push(parse_term(text, sign)?);
            Ok(())
        };
        let mut prev_significant: Option<char> = None;
        for ch in s.chars() {
            let binary = matches!(prev_significant, Some(p) if p != '*' && p != '^' && p != 'e' && p != 'E');
            if (ch == '+' || ch == '-') && binary {
                flush(sign, &current, &mut terms)?;
                current.clear();
                sign = if ch == '-' { -1.0 } else { 1.0 };
                prev_significant = None;
                continue;
            }
            if (ch == '+' || ch == '-') && prev_significant.is_none() && current.trim().is_empty() {
                if ch == '-' {
                    sign = -sign;
                }
                continue;
            }
            if !ch.is_whitespace() {
                prev_significant = Some(ch);
            }
            current.push(ch);
        }
        flush(sign, &current, &mut terms)?;
        Ok(Self::new(terms))
    }
}

fn parse_term(text: &str, sign: f64) -> Result<Term> {
    let mut coefficient = Complex64::new(sign, 0.0);
    let mut word = Vec::new();
    for factor in text.split(|c: char| c == '*' || c.is_whitespace()).filter(|f| !f.is_empty()) {
        let (base, power) = match factor.split_once('^') {
            Some((b, p)) => (
                b,
                p.parse::<u32>()
                    .map_err(|_| Error::InvalidArgument(format!("bad exponent in '{factor}'")))?,
            ),
            None => (factor, 1),
        };
        match base {
            "Q" | "q" => word.extend(std::iter::repeat_n(Letter::Q, power as usize)),
            "P" | "p" => word.extend(std::iter::repeat_n(Letter::P, power as usize)),
            "i" | "I" => coefficient *= Complex64::new(0.0, 1.0).powu(power),
            _ => {
                let (num, imag) = match base.strip_suffix('i') {
                    Some(n) => (n, true),
                    None => (base, false),
                };
                let v: f64 = num
                    .parse()
                    .map_err(|_| Error::InvalidArgument(format!("cannot parse factor '{factor}'")))?;
                let z = if imag { Complex64::new(0.0, v) } else { Complex64::new(v, 0.0) };
                coefficient *= z.powu(power);
            }
        }
    }
    Ok(Term { coefficient, word })
}

/// Exact coefficient `rational * (hbar/i)^power` of one derivative order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExactCoefficient {
    pub rational: Rational64,
    pub hbar_over_i_power: u32,
}

/// Bopp word applied to `delta(eta) delta(xi)`: orders `(a, b)` with exact
/// coefficients, before the `sqrt(2 pi hbar)` scale and the term coefficient.
pub fn compile_word(word: &[Letter]) -> BTreeMap<(usize, usize), ExactCoefficient> {
    let mut cur: BTreeMap<(usize, usize), Rational64> = BTreeMap::new();
    cur.insert((0, 0), Rational64::from_integer(1));
    for letter in word.iter().rev() {
        let mut next: BTreeMap<(usize, usize), Rational64> = BTreeMap::new();
        for (&(a, b), &r) in &cur {
            match letter {
                Letter::Q => {
                    *next.entry((a + 1, b)).or_default() += r;
                    if b > 0 {
                        *next.entry((a, b - 1)).or_default() += r * Rational64::new(-(b as i64), 2);
                    }
                }
                Letter::P => {
                    *next.entry((a, b + 1)).or_default() += r;
                    if a > 0 {
                        *next.entry((a - 1, b)).or_default() += r * Rational64::new(a as i64, 2);
                    }
                }
            }
        }
        next.retain(|_, r| *r != Rational64::from_integer(0));
        cur = next;
    }
    let n = word.len();
    cur.into_iter()
        .map(|((a, b), r)| {
            (
                (a, b),
                ExactCoefficient {
                    rational: r,
                    hbar_over_i_power: ((n + a + b) / 2) as u32,
                },
            )
        })
        .collect()
}

/// Ambiguity function of an operator as `sum table[(a, b)] d_eta^a d_xi^b delta delta`.
#[derive(Debug, Clone, PartialEq)]
pub struct DifferentialDescriptor {
    pub table: BTreeMap<(usize, usize), Complex64>,
}

impl DifferentialDescriptor {
    pub fn max_order(&self) -> usize {
        self.table.keys().map(|(a, b)| a + b).max().unwrap_or(0)
    }

    /// Discrete field whose trace product with any ambiguity field equals the
    /// stencil evaluation of the descriptor on that field.
    pub fn to_field(&self, grid: PhaseGrid, c: PhysicalConstants, accuracy: usize) -> Result<ComplexField> {
        if grid.labels != crate::grid::PhaseLabels::EtaXi {
            return invalid("descriptor fields live on an (eta, xi) grid");
        }
        let (oa, ob) = origin(&grid)?;
        let (de, dx) = (grid.axis1.step(), grid.axis2.step());
        let mut f = ComplexField::zeros(grid, c);
        for (&(a, b), &coef) in &self.table {
            let (wa, wb) = (central_weights(a, accuracy), central_weights(b, accuracy));
            let (ra, rb) = (central_half_width(a, accuracy) as i64, central_half_width(b, accuracy) as i64);
            check_room(&grid, oa, ob, ra as usize, rb as usize)?;
            let scale = coef / (de.powi(a as i32 + 1) * dx.powi(b as i32 + 1));
            for (i, w1) in (-ra..=ra).zip(&wa) {
                for (j, w2) in (-rb..=rb).zip(&wb) {
                    // placed at the mirror point so the trace product reflects it back
                    let ia = (oa as i64 - i) as usize;
                    let jb = (ob as i64 - j) as usize;
                    f.values_mut()[[ia, jb]] += scale * w1 * w2;
                }
            }
        }
        Ok(f)
    }
}

pub fn compile_descriptor(op: &PolynomialOperator, c: &PhysicalConstants) -> Result<DifferentialDescriptor> {
    if op.terms().is_empty() {
        return invalid("operator has no terms");
    }
    let hoi = Complex64::new(0.0, -c.hbar());
    let mut table: BTreeMap<(usize, usize), Complex64> = BTreeMap::new();
    for term in op.terms() {
        for (key, ex) in compile_word(&term.word) {
            let r = *ex.rational.numer() as f64 / *ex.rational.denom() as f64;
            *table.entry(key).or_default() +=
                term.coefficient * c.seed_norm() * r * hoi.powu(ex.hbar_over_i_power);
        }
    }
    table.retain(|_, z| *z != Complex64::new(0.0, 0.0));
    Ok(DifferentialDescriptor { table })
}

/// Sources of `d_eta^a d_xi^b P(0, 0)`.
pub trait OriginDerivatives {
    fn derivative_at_origin(&self, a: usize, b: usize) -> Result<Complex64>;
}

impl OriginDerivatives for GaussianForm {
    fn derivative_at_origin(&self, a: usize, b: usize) -> Result<Complex64> {
        Ok(GaussianForm::derivative_at_origin(self, a, b))
    }
}

impl OriginDerivatives for AmbiguityClosedFormGaussian {
    fn derivative_at_origin(&self, a: usize, b: usize) -> Result<Complex64> {
        Ok(self.form().derivative_at_origin(a, b))
    }
}

/// Grid field with central finite-difference stencils of a given accuracy order.
#[derive(Debug, Clone, Copy)]
pub struct Stencil<'a> {
    pub field: &'a ComplexField,
    pub accuracy: usize,
}

impl OriginDerivatives for Stencil<'_> {
    fn derivative_at_origin(&self, a: usize, b: usize) -> Result<Complex64> {
        let f = self.field;
        f.expect_kind(FieldKind::Ambiguity)?;
        let grid = f.grid();
        let (oa, ob) = origin(grid)?;
        let (ra, rb) = (central_half_width(a, self.accuracy), central_half_width(b, self.accuracy));
        check_room(grid, oa, ob, ra, rb)?;
        let (wa, wb) = (central_weights(a, self.accuracy), central_weights(b, self.accuracy));
        let v = f.values();
        let mut sum = Complex64::new(0.0, 0.0);
        for (i, w1) in wa.iter().enumerate() {
            for (j, w2) in wb.iter().enumerate() {
                sum += v[[oa - ra + i, ob - rb + j]] * (w1 * w2);
            }
        }
        Ok(sum / (grid.axis1.step().powi(a as i32) * grid.axis2.step().powi(b as i32)))
    }
}

impl OriginDerivatives for ComplexField {
    fn derivative_at_origin(&self, a: usize, b: usize) -> Result<Complex64> {
        Stencil {
            field: self,
            accuracy: DEFAULT_ACCURACY,
        }
        .derivative_at_origin(a, b)
    }
}

fn origin(grid: &PhaseGrid) -> Result<(usize, usize)> {
    match (grid.axis1.zero_index(), grid.axis2.zero_index()) {
        (Some(a), Some(b)) => Ok((a, b)),
        _ => invalid("the grid does not sample the origin"),
    }
}

fn check_room(grid: &PhaseGrid, oa: usize, ob: usize, ra: usize, rb: usize) -> Result<()> {
    if oa < ra || ob < rb || oa + ra >= grid.axis1.count() || ob + rb >= grid.axis2.count() {
        return invalid(format!(
            "derivative stencil of half-width ({ra}, {rb}) exceeds the grid around the origin"
        ));
    }
    Ok(())
}

/// `<op>` from derivatives of the ambiguity function at the origin; no
/// quadrature over the plane is involved.
pub fn expectation_polynomial(p: &impl OriginDerivatives, op: &PolynomialOperator, c: &PhysicalConstants) -> Result<Complex64> {
    let d = compile_descriptor(op, c)?;
    let mut sum = Complex64::new(0.0, 0.0);
    for (&(a, b), &coef) in &d.table {
        sum += coef * p.derivative_at_origin(a, b)?;
    }
    Ok(sum)
}

/// Left Bopp operator on a grid field with spectral derivatives.
///
/// Along eta at fixed xi the field is a trigonometric sum over centres
/// `c_k = q_0 + xi/2 + k h`; along xi at fixed eta over momenta
/// `p_k = p_0 + eta/2 + k dp`. `(hbar/i) d` multiplies each mode by its
/// centre or momentum.
pub fn bopp_apply(a: &ComplexField, letter: Letter) -> Result<ComplexField> {
    bopp(a, letter, 1.0)
}

/// Right multiplication: ambiguity of `A q` (`(hbar/i) d_eta - xi/2`) or
/// `A p` (`(hbar/i) d_xi + eta/2`).
pub fn bopp_apply_right(a: &ComplexField, letter: Letter) -> Result<ComplexField> {
    bopp(a, letter, -1.0)
}

fn bopp(a: &ComplexField, letter: Letter, side: f64) -> Result<ComplexField> {
    a.expect_kind(FieldKind::Ambiguity)?;
    let grid = *a.grid();
    let (n1, n2) = grid.shape();
    if n1 < 8 || n2 < 8 {
        return invalid("spectral Bopp operators need at least 8 points per axis");
    }
    let hbar = a.constants().hbar();
    let mut out = a.clone();
    match letter {
        Letter::Q => {
            let dft = Dft::new(n1);
            let hq = 2.0 * std::f64::consts::PI * hbar / (n1 as f64 * grid.axis1.step());
            let q0 = -((n1 as f64 - 1.0) / 2.0) * hq;
            for s in 0..n2 {
                let xi = grid.axis2.value(s);
                let mut col: Vec<Complex64> = (0..n1).map(|i| a.values()[[i, s]]).collect();
                dft.spectral_multiply(&mut col, grid.axis1.first(), grid.axis1.step(), q0 + xi / 2.0, hbar, |k| {
                    Complex64::new(k, 0.0)
                });
                for (i, z) in col.into_iter().enumerate() {
                    out.values_mut()[[i, s]] = z + a.values()[[i, s]] * (side * xi / 2.0);
                }
            }
        }
        Letter::P => {
            let dft = Dft::new(n2);
            let dp = 2.0 * std::f64::consts::PI * hbar / (n2 as f64 * grid.axis2.step());
            let p0 = -((n2 as f64 - 1.0) / 2.0) * dp;
            for i in 0..n1 {
                let eta = grid.axis1.value(i);
                let mut row: Vec<Complex64> = (0..n2).map(|s| a.values()[[i, s]]).collect();
                dft.spectral_multiply(&mut row, grid.axis2.first(), grid.axis2.step(), p0 + eta / 2.0, hbar, |k| {
                    Complex64::new(k, 0.0)
                });
                for (s, z) in row.into_iter().enumerate() {
                    out.values_mut()[[i, s]] = z - a.values()[[i, s]] * (side * eta / 2.0);
                }
            }
        }
    }
    Ok(out)
}

/// `int deta dxi A(eta, xi) B(-eta, -xi)` by grid quadrature. The unpaired
/// first row/column of an even origin-anchored axis has no mirror and is
/// dropped; its contribution is bounded by the field magnitude at the grid
/// edge.
pub fn trace_product(a: &ComplexField, b: &ComplexField) -> Result<Complex64> {
    a.check_compatible(b)?;
    a.expect_kind(FieldKind::Ambiguity)?;
    let g = a.grid();
    let (n1, n2) = g.shape();
    let mut sum = Complex64::new(0.0, 0.0);
    for i in 0..n1 {
        let Some(ri) = g.axis1.reflect_index(i) else { continue };
        for j in 0..n2 {
            let Some(rj) = g.axis2.reflect_index(j) else { continue };
            sum += a.values()[[i, j]] * b.values()[[ri, rj]];
        }
    }
    Ok(sum * g.cell_area())
}
