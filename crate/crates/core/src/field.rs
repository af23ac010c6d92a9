use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::grid::{PhaseGrid, PhaseLabels, PhysicalConstants};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldKind {
    Ambiguity,
    Wigner,
}

/// Complex samples on a [`PhaseGrid`], indexed `[axis1, axis2]`.
#[derive(Debug, Clone)]
pub struct ComplexField {
    grid: PhaseGrid,
    values: Array2<Complex64>,
    constants: PhysicalConstants,
}

impl ComplexField {
    pub fn new(
        grid: PhaseGrid,
        values: Array2<Complex64>,
        constants: PhysicalConstants,
    ) -> Result<Self> {
        if values.dim() != grid.shape() {
            return invalid(format!(
                "field shape {:?} does not match grid {:?}",
                values.dim(),
                grid.shape()
            ));
        }
        Ok(Self {
            grid,
            values,
            constants,
        })
    }

    pub fn zeros(grid: PhaseGrid, constants: PhysicalConstants) -> Self {
        Self {
            values: Array2::zeros(grid.shape()),
            grid,
            constants,
        }
    }

    /// Sample `f(axis1, axis2)` on every grid point.
    pub fn from_fn(
        grid: PhaseGrid,
        constants: PhysicalConstants,
        f: impl Fn(f64, f64) -> Complex64,
    ) -> Self {
        let values = Array2::from_shape_fn(grid.shape(), |(a, b)| {
            f(grid.axis1.value(a), grid.axis2.value(b))
        });
        Self {
            grid,
            values,
            constants,
        }
    }

    pub fn kind(&self) -> FieldKind {
        match self.grid.labels {
            PhaseLabels::EtaXi => FieldKind::Ambiguity,
            PhaseLabels::QP => FieldKind::Wigner,
        }
    }

    #[inline]
    pub fn grid(&self) -> &PhaseGrid {
        &self.grid
    }

    #[inline]
    pub fn values(&self) -> &Array2<Complex64> {
        &self.values
    }

    #[inline]
    pub fn values_mut(&mut self) -> &mut Array2<Complex64> {
        &mut self.values
    }

    pub fn into_values(self) -> Array2<Complex64> {
        self.values
    }

    #[inline]
    pub fn constants(&self) -> &PhysicalConstants {
        &self.constants
    }

    pub(crate) fn expect_kind(&self, kind: FieldKind) -> Result<()> {
        if self.kind() != kind {
            return invalid(format!("expected a {kind:?} field, got {:?}", self.kind()));
        }
        Ok(())
    }

    pub(crate) fn check_compatible(&self, other: &ComplexField) -> Result<()> {
        self.constants.check_same(&other.constants)?;
        if !self.grid.same_as(&other.grid) {
            return invalid("fields live on different grids");
        }
        Ok(())
    }

    /// Value at the grid origin, if the origin is sampled.
    pub fn at_origin(&self) -> Option<Complex64> {
        let a = self.grid.axis1.zero_index()?;
        let b = self.grid.axis2.zero_index()?;
        Some(self.values[[a, b]])
    }

    /// Nearest-sample lookup.
    pub fn sample_nearest(&self, x1: f64, x2: f64) -> Option<Complex64> {
        let a = self.grid.axis1.nearest_index(x1)?;
        let b = self.grid.axis2.nearest_index(x2)?;
        Some(self.values[[a, b]])
    }

    /// Largest `|values|`.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `max |self - other|` over the grid.
    pub fn max_abs_diff(&self, other: &ComplexField) -> Result<f64> {
        self.check_compatible(other)?;
        Ok(self
            .values
            .iter()
            .zip(other.values.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// Grid quadrature of `|values|^2`.
    pub fn l2_norm(&self) -> f64 {
        (self.values.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.grid.cell_area()).sqrt()
    }

    /// Grid quadrature of the field, `sum(values) * cell_area`.
    pub fn integral(&self) -> Complex64 {
        self.values.sum() * self.grid.cell_area()
    }

    /// Largest violation of `f(-x1, -x2) = conj(f(x1, x2))` over mirrored pairs.
    ///
    /// Unpaired samples (the leading row/column of an even origin-anchored
    /// axis) are skipped.
    pub fn hermitian_defect(&self) -> f64 {
        let (n1, n2) = self.grid.shape();
        let mut worst = 0.0f64;
        for a in 0..n1 {
            let Some(ra) = self.grid.axis1.reflect_index(a) else {
                continue;
            };
            for b in 0..n2 {
                let Some(rb) = self.grid.axis2.reflect_index(b) else {
                    continue;
                };
                worst = worst.max((self.values[[ra, rb]] - self.values[[a, b]].conj()).norm());
            }
        }
        worst
    }

    /// Largest `|imaginary part|`.
    pub fn max_imag(&self) -> f64 {
        self.values.iter().map(|z| z.im.abs()).fold(0.0, f64::max)
    }

    /// Grid point with the largest `|value|`, as `(axis1, axis2, value)`.
    pub fn peak(&self) -> (f64, f64, Complex64) {
        let mut best = (0, 0);
        let mut best_abs = -1.0;
        for ((a, b), z) in self.values.indexed_iter() {
            if z.norm() > best_abs {
                best_abs = z.norm();
                best = (a, b);
            }
        }
        (
            self.grid.axis1.value(best.0),
            self.grid.axis2.value(best.1),
            self.values[best],
        )
    }
}
