//! Physical constants, uniform axes and their Fourier-conjugate partners.
//!
//! Two placements of a uniform axis are used throughout the crate:
//!
//! * [`Anchor::Symmetric`]: `values[j] = (j - (N-1)/2) * step`. Reflection
//!   `j -> N-1-j` is an exact automorphism. Position (`q`) and momentum (`p`)
//!   axes use this placement.
//! * [`Anchor::Origin`]: `values[j] = (j - floor(N/2)) * step`. Zero is always a
//!   grid point, and for even `N` the first sample has no mirror partner.
//!   Displacement axes (`eta`, `xi`) use this placement so that the origin,
//!   where normalization and expectation values are read off, is sampled.
//!
//! For odd `N` the two placements coincide.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{invalid, Result};

/// Physical constants carried by every state and field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    hbar: f64,
}

impl PhysicalConstants {
    pub fn new(hbar: f64) -> Result<Self> {
        if !(hbar > 0.0 && hbar.is_finite()) {
            return invalid(format!("hbar must be positive and finite, got {hbar}"));
        }
        Ok(Self { hbar })
    }

    #[inline]
    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    /// `sqrt(2 pi hbar)`, the normalization of the displacement seed.
    #[inline]
    pub fn seed_norm(&self) -> f64 {
        (2.0 * PI * self.hbar).sqrt()
    }

    pub(crate) fn check_same(&self, other: &Self) -> Result<()> {
        if self.hbar != other.hbar {
            return invalid(format!(
                "mixed hbar values: {} vs {}",
                self.hbar, other.hbar
            ));
        }
        Ok(())
    }
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self { hbar: 1.0 }
    }
}

/// Placement of a uniform axis relative to zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Anchor {
    Symmetric,
    Origin,
}

/// A uniform one-dimensional sampling axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    count: usize,
    step: f64,
    anchor: Anchor,
}

impl Grid1D {
    pub fn new(count: usize, step: f64, anchor: Anchor) -> Result<Self> {
        if count < 2 {
            return invalid(format!("grid needs at least 2 points, got {count}"));
        }
        if !(step > 0.0 && step.is_finite()) {
            return invalid(format!("grid step must be positive, got {step}"));
        }
        Ok(Self {
            count,
            step,
            anchor,
        })
    }

    /// Symmetric grid centered on zero.
    pub fn centered(count: usize, step: f64) -> Result<Self> {
        Self::new(count, step, Anchor::Symmetric)
    }

    /// Grid containing zero at index `count / 2`.
    pub fn origin_anchored(count: usize, step: f64) -> Result<Self> {
        Self::new(count, step, Anchor::Origin)
    }

    #[inline]
    pub fn count(&self) -> usize {
        self.count
    }

    #[inline]
    pub fn step(&self) -> f64 {
        self.step
    }

    #[inline]
    pub fn anchor(&self) -> Anchor {
        self.anchor
    }

    /// Offset `o` such that `values[j] = (j - o) * step`.
    #[inline]
    pub fn offset(&self) -> f64 {
        match self.anchor {
            Anchor::Symmetric => (self.count as f64 - 1.0) / 2.0,
            Anchor::Origin => (self.count / 2) as f64,
        }
    }

    #[inline]
    pub fn value(&self, j: usize) -> f64 {
        (j as f64 - self.offset()) * self.step
    }

    #[inline]
    pub fn first(&self) -> f64 {
        self.value(0)
    }

    #[inline]
    pub fn last(&self) -> f64 {
        self.value(self.count - 1)
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.count).map(|j| self.value(j)).collect()
    }

    /// Index of the zero sample, if zero lies on the grid.
    pub fn zero_index(&self) -> Option<usize> {
        match self.anchor {
            Anchor::Origin => Some(self.count / 2),
            Anchor::Symmetric if self.count % 2 == 1 => Some(self.count / 2),
            Anchor::Symmetric => None,
        }
    }

    /// Index holding `-values[j]`, if it exists.
    pub fn reflect_index(&self, j: usize) -> Option<usize> {
        match self.anchor {
            Anchor::Symmetric => Some(self.count - 1 - j),
            Anchor::Origin => {
                let mirrored = 2 * (self.count / 2);
                (j > 0 || self.count % 2 == 1)
                    .then(|| mirrored - j)
                    .filter(|&r| r < self.count)
            }
        }
    }

    /// Nearest index to `x`, or `None` if `x` is more than half a step outside.
    pub fn nearest_index(&self, x: f64) -> Option<usize> {
        let f = x / self.step + self.offset();
        let j = f.round();
        (j >= 0.0 && j < self.count as f64).then_some(j as usize)
    }

    /// Index of `x` if it coincides with a sample to within `tol * step`.
    pub fn exact_index(&self, x: f64, tol: f64) -> Option<usize> {
        self.nearest_index(x)
            .filter(|&j| (self.value(j) - x).abs() <= tol * self.step)
    }

    /// Length of one period of the sampled lattice, `count * step`.
    #[inline]
    pub fn period(&self) -> f64 {
        self.count as f64 * self.step
    }

    pub fn same_shape(&self, other: &Grid1D) -> bool {
        self.count == other.count
            && self.anchor == other.anchor
            && (self.step - other.step).abs() <= 1e-12 * self.step.max(other.step)
    }
}

/// Build a symmetric grid; see [`Grid1D::centered`].
pub fn make_centered_grid(count: usize, step: f64) -> Result<Grid1D> {
    Grid1D::centered(count, step)
}

/// Fourier-conjugate axis: same count and anchor, `step' = 2 pi hbar / (count * step)`.
pub fn conjugate_grid(g: &Grid1D, c: &PhysicalConstants) -> Grid1D {
    Grid1D {
        count: g.count,
        step: 2.0 * PI * c.hbar() / (g.count as f64 * g.step),
        anchor: g.anchor,
    }
}

/// Axis names of a two-dimensional phase grid; they fix the field kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PhaseLabels {
    /// Displacement parameters `(eta, xi)`: eta has momentum units, xi position units.
    EtaXi,
    /// Phase-space coordinates `(q, p)`.
    QP,
}

impl PhaseLabels {
    pub fn names(&self) -> (&'static str, &'static str) {
        match self {
            PhaseLabels::EtaXi => ("eta", "xi"),
            PhaseLabels::QP => ("q", "p"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseGrid {
    pub axis1: Grid1D,
    pub axis2: Grid1D,
    pub labels: PhaseLabels,
}

impl PhaseGrid {
    /// Displacement grid matched to a position axis: eta is conjugate to q,
    /// xi shares the q step, both origin-anchored.
    pub fn ambiguity_for(position: &Grid1D, c: &PhysicalConstants) -> Self {
        let eta = conjugate_grid(position, c);
        PhaseGrid {
            axis1: Grid1D {
                anchor: Anchor::Origin,
                ..eta
            },
            axis2: Grid1D {
                anchor: Anchor::Origin,
                ..*position
            },
            labels: PhaseLabels::EtaXi,
        }
    }

    /// Phase-space grid matched to a position axis: q is the axis itself,
    /// p its symmetric conjugate.
    pub fn wigner_for(position: &Grid1D, c: &PhysicalConstants) -> Self {
        let q = Grid1D {
            anchor: Anchor::Symmetric,
            ..*position
        };
        PhaseGrid {
            axis1: q,
            axis2: conjugate_grid(&q, c),
            labels: PhaseLabels::QP,
        }
    }

    /// The grid reached by a two-dimensional Fourier transform.
    pub fn fourier_dual(&self, c: &PhysicalConstants) -> Self {
        let (anchor, labels) = match self.labels {
            PhaseLabels::EtaXi => (Anchor::Symmetric, PhaseLabels::QP),
            PhaseLabels::QP => (Anchor::Origin, PhaseLabels::EtaXi),
        };
        PhaseGrid {
            axis1: Grid1D {
                anchor,
                ..conjugate_grid(&self.axis1, c)
            },
            axis2: Grid1D {
                anchor,
                ..conjugate_grid(&self.axis2, c)
            },
            labels,
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.axis1.count, self.axis2.count)
    }

    pub fn same_as(&self, other: &PhaseGrid) -> bool {
        self.labels == other.labels
            && self.axis1.same_shape(&other.axis1)
            && self.axis2.same_shape(&other.axis2)
    }

    /// Area element of the grid quadrature.
    pub fn cell_area(&self) -> f64 {
        self.axis1.step * self.axis2.step
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn centered_examples() {
        assert_eq!(make_centered_grid(3, 1.0).unwrap().values(), vec![-1.0, 0.0, 1.0]);
        assert_eq!(
            make_centered_grid(4, 0.5).unwrap().values(),
            vec![-0.75, -0.25, 0.25, 0.75]
        );
        let g = make_centered_grid(256, 0.1).unwrap();
        assert!((g.value(0) + 12.75).abs() < 1e-12);
        assert!((g.value(255) - 12.75).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(make_centered_grid(1, 1.0).is_err());
        assert!(make_centered_grid(0, 1.0).is_err());
        assert!(make_centered_grid(4, 0.0).is_err());
        assert!(make_centered_grid(4, -1.0).is_err());
        assert!(PhysicalConstants::new(0.0).is_err());
    }

    #[test]
    fn conjugate_examples() {
        let c = PhysicalConstants::default();
        let g = make_centered_grid(256, 0.1).unwrap();
        let k = conjugate_grid(&g, &c);
        assert!((k.step() - 2.0 * PI / 25.6).abs() < 1e-12);
        assert!((k.step() - 0.2454369).abs() < 1e-7);
        let g = make_centered_grid(4, PI / 2.0).unwrap();
        assert!((conjugate_grid(&g, &c).step() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn origin_anchor_reflection() {
        let g = Grid1D::origin_anchored(4, 1.0).unwrap();
        assert_eq!(g.values(), vec![-2.0, -1.0, 0.0, 1.0]);
        assert_eq!(g.reflect_index(0), None);
        assert_eq!(g.reflect_index(1), Some(3));
        assert_eq!(g.reflect_index(2), Some(2));
        let odd = Grid1D::origin_anchored(5, 1.0).unwrap();
        assert_eq!(odd.values(), make_centered_grid(5, 1.0).unwrap().values());
        assert_eq!(odd.reflect_index(0), Some(4));
    }

    #[test]
    fn nearest_and_exact_index() {
        let g = make_centered_grid(4, 0.5).unwrap();
        assert_eq!(g.nearest_index(0.2), Some(2));
        assert_eq!(g.exact_index(0.25, 1e-9), Some(2));
        assert_eq!(g.exact_index(0.2, 1e-9), None);
        assert_eq!(g.nearest_index(5.0), None);
    }

    #[test]
    fn phase_grids_are_dual() {
        let c = PhysicalConstants::new(0.7).unwrap();
        let q = make_centered_grid(64, 0.2).unwrap();
        let amb = PhaseGrid::ambiguity_for(&q, &c);
        let wig = PhaseGrid::wigner_for(&q, &c);
        assert!(amb.fourier_dual(&c).same_as(&wig));
        assert!(wig.fourier_dual(&c).same_as(&amb));
        assert_eq!(amb.axis1.zero_index(), Some(32));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn conjugate_is_involution(count in 2usize..600, step in 1e-3f64..10.0, hbar in 0.1f64..5.0) {
                let c = PhysicalConstants::new(hbar).unwrap();
                for anchor in [Anchor::Symmetric, Anchor::Origin] {
                    let g = Grid1D::new(count, step, anchor).unwrap();
                    let k = conjugate_grid(&g, &c);
                    let back = conjugate_grid(&k, &c);
                    prop_assert_eq!(back.count(), count);
                    prop_assert!((back.step() - step).abs() <= 1e-12 * step);
                    let product = g.step() * k.step() * count as f64;
                    prop_assert!((product - 2.0 * PI * hbar).abs() <= 1e-12 * product);
                }
            }

            #[test]
            fn centered_reflection_and_spacing(count in 2usize..600, step in 1e-3f64..10.0) {
                let g = make_centered_grid(count, step).unwrap();
                for j in 0..count {
                    let r = g.reflect_index(j).unwrap();
                    prop_assert_eq!(r, count - 1 - j);
                    prop_assert!((g.value(r) + g.value(j)).abs() <= 1e-12 * step * count as f64);
                    if j + 1 < count {
                        prop_assert!((g.value(j + 1) - g.value(j) - step).abs() <= 1e-12 * step * count as f64);
                    }
                }
            }
        }
    }
}
