//! Versioned JSON container for wavefunctions, density matrices and phase
//! fields, with a flat CSV export.
//!
//! Numbers are written with the shortest decimal form that reads back to
//! the same `f64`, so a write/read cycle is exact on the numeric payload.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DMatrix;
use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::field::ComplexField;
use crate::grid::{Anchor, Grid1D, PhaseGrid, PhaseLabels, PhysicalConstants};
use crate::states::{DensityMatrix, WaveFunction};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DocumentKind {
    Psi,
    Rho,
    Ambiguity,
    Wigner,
}

impl DocumentKind {
    fn labels(self) -> &'static [&'static str] {
        match self {
            DocumentKind::Psi => &["q"],
            DocumentKind::Rho => &["q", "q'"],
            DocumentKind::Ambiguity => &["eta", "xi"],
            DocumentKind::Wigner => &["q", "p"],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisSpec {
    pub label: String,
    pub count: usize,
    pub step: f64,
    pub anchor: Anchor,
}

impl AxisSpec {
    fn new(label: &str, g: &Grid1D) -> Self {
        AxisSpec {
            label: label.to_string(),
            count: g.count(),
            step: g.step(),
            anchor: g.anchor(),
        }
    }

    pub fn grid(&self) -> Result<Grid1D> {
        Grid1D::new(self.count, self.step, self.anchor)
    }
}

/// Samples as `[re, im]` pairs; one level of nesting per axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DocumentData {
    Vector(Vec<[f64; 2]>),
    Matrix(Vec<Vec<[f64; 2]>>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldDocument {
    pub schema_version: u32,
    pub hbar: f64,
    pub kind: DocumentKind,
    pub axes: Vec<AxisSpec>,
    pub data: DocumentData,
    #[serde(default)]
    pub metadata: Map<String, Value>,
}

fn pair(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

fn bad<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Document(msg.into()))
}

fn matrix_rows(rows: usize, cols: usize, at: impl Fn(usize, usize) -> Complex64) -> DocumentData {
    DocumentData::Matrix(
        (0..rows)
            .map(|i| (0..cols).map(|j| pair(at(i, j))).collect())
            .collect(),
    )
}

impl FieldDocument {
    fn build(kind: DocumentKind, hbar: f64, grids: &[Grid1D], data: DocumentData) -> Self {
        let axes = kind
            .labels()
            .iter()
            .zip(grids)
            .map(|(l, g)| AxisSpec::new(l, g))
            .collect();
        FieldDocument {
            schema_version: SCHEMA_VERSION,
            hbar,
            kind,
            axes,
            data,
            metadata: Map::new(),
        }
    }

    pub fn from_wavefunction(psi: &WaveFunction) -> Self {
        let data = DocumentData::Vector(psi.samples().iter().copied().map(pair).collect());
        Self::build(DocumentKind::Psi, psi.constants().hbar(), &[*psi.grid()], data)
    }

    pub fn from_density(rho: &DensityMatrix) -> Self {
        let n = rho.grid().count();
        let e = rho.entries();
        let data = matrix_rows(n, n, |i, j| e[(i, j)]);
        Self::build(DocumentKind::Rho, rho.constants().hbar(), &[*rho.grid(), *rho.grid()], data)
    }

    pub fn from_field(f: &ComplexField) -> Self {
        let kind = match f.grid().labels {
            PhaseLabels::EtaXi => DocumentKind::Ambiguity,
            PhaseLabels::QP => DocumentKind::Wigner,
        };
        let (n1, n2) = f.grid().shape();
        let v = f.values();
        let data = matrix_rows(n1, n2, |i, j| v[[i, j]]);
        Self::build(kind, f.constants().hbar(), &[f.grid().axis1, f.grid().axis2], data)
    }

    pub fn with_metadata(mut self, key: &str, value: Value) -> Self {
        self.metadata.insert(key.to_string(), value);
        self
    }

    pub fn constants(&self) -> Result<PhysicalConstants> {
        PhysicalConstants::new(self.hbar)
    }

    /// Check version, axis labels and data shape.
    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return bad(format!(
                "schema version {} is not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            ));
        }
        let labels: Vec<&str> = self.axes.iter().map(|a| a.label.as_str()).collect();
        if labels != self.kind.labels() {
            return bad(format!(
                "{:?} document needs axes {:?}, found {labels:?}",
                self.kind,
                self.kind.labels()
            ));
        }
        for a in &self.axes {
            a.grid()?;
        }
        match (&self.data, self.axes.as_slice()) {
            (DocumentData::Vector(v), [a]) if v.len() == a.count => {}
            (DocumentData::Matrix(m), [a, b]) if m.len() == a.count && m.iter().all(|r| r.len() == b.count) => {}
            _ => return bad("data shape does not match the axes"),
        }
        if self.data_values().any(|z| !z.is_finite()) {
            return bad("data contains non-finite values");
        }
        Ok(())
    }

    fn data_values(&self) -> Box<dyn Iterator<Item = Complex64> + '_> {
        match &self.data {
            DocumentData::Vector(v) => Box::new(v.iter().map(|p| Complex64::new(p[0], p[1]))),
            DocumentData::Matrix(m) => Box::new(m.iter().flatten().map(|p| Complex64::new(p[0], p[1]))),
        }
    }

    fn matrix(&self) -> Result<(usize, usize, Vec<Complex64>)> {
        match (&self.data, self.axes.as_slice()) {
            (DocumentData::Matrix(_), [a, b]) => Ok((a.count, b.count, self.data_values().collect())),
            _ => bad("expected a two-axis document"),
        }
    }

    fn expect_kind(&self, kind: DocumentKind) -> Result<()> {
        self.validate()?;
        if self.kind != kind {
            return bad(format!("expected a {kind:?} document, found {:?}", self.kind));
        }
        Ok(())
    }

    pub fn to_wavefunction(&self) -> Result<WaveFunction> {
        self.expect_kind(DocumentKind::Psi)?;
        WaveFunction::new(self.axes[0].grid()?, self.data_values().collect(), self.constants()?)
    }

    pub fn to_density(&self) -> Result<DensityMatrix> {
        self.expect_kind(DocumentKind::Rho)?;
        let (n1, n2, values) = self.matrix()?;
        DensityMatrix::new(
            self.axes[0].grid()?,
            DMatrix::from_row_slice(n1, n2, &values),
            self.constants()?,
        )
    }

    pub fn to_field(&self) -> Result<ComplexField> {
        self.validate()?;
        let labels = match self.kind {
            DocumentKind::Ambiguity => PhaseLabels::EtaXi,
            DocumentKind::Wigner => PhaseLabels::QP,
            k => return bad(format!("expected a phase-space document, found {k:?}")),
        };
        let (n1, n2, values) = self.matrix()?;
        let grid = PhaseGrid {
            axis1: self.axes[0].grid()?,
            axis2: self.axes[1].grid()?,
            labels,
        };
        let values = Array2::from_shape_vec((n1, n2), values).map_err(|e| Error::Document(e.to_string()))?;
        ComplexField::new(grid, values, self.constants()?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: FieldDocument = serde_json::from_str(text)?;
        doc.validate()?;
        Ok(doc)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        Ok(std::fs::write(path, self.to_json()?)?)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Rows `axis1,axis2,re,im`; one-axis documents leave `axis2` empty.
    pub fn to_csv(&self) -> Result<String> {
        self.validate()?;
        let mut out = String::from("axis1,axis2,re,im\n");
        let grids: Vec<Grid1D> = self.axes.iter().map(AxisSpec::grid).collect::<Result<_>>()?;
        match &self.data {
            DocumentData::Vector(v) => {
                for (i, p) in v.iter().enumerate() {
                    let _ = writeln!(out, "{:?},,{:?},{:?}", grids[0].value(i), p[0], p[1]);
                }
            }
            DocumentData::Matrix(m) => {
                for (i, row) in m.iter().enumerate() {
                    for (j, p) in row.iter().enumerate() {
                        let _ = writeln!(out, "{:?},{:?},{:?},{:?}", grids[0].value(i), grids[1].value(j), p[0], p[1]);
                    }
                }
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ambiguity::{ambiguity_from_density, wigner_from_density};
    use crate::grid::make_centered_grid;
    use crate::states::{density_from_wavefunction, gaussian_wavefunction, GaussianSpec};
    use proptest::prelude::*;

    fn psi() -> WaveFunction {
        let g = make_centered_grid(32, 0.5).unwrap();
        gaussian_wavefunction(&GaussianSpec::new(0.3, -0.7, 1.1).unwrap(), &g, &PhysicalConstants::default()).unwrap()
    }

    #[test]
    fn all_kinds_round_trip() {
        let psi = psi();
        let rho = density_from_wavefunction(&psi);
        let amb = ambiguity_from_density(&rho).unwrap();
        let w = wigner_from_density(&rho).unwrap();

        let back = FieldDocument::from_json(&FieldDocument::from_wavefunction(&psi).to_json().unwrap()).unwrap();
        assert_eq!(back.to_wavefunction().unwrap().samples(), psi.samples());
        let back = FieldDocument::from_json(&FieldDocument::from_density(&rho).to_json().unwrap()).unwrap();
        assert_eq!(back.to_density().unwrap().entries(), rho.entries());
        for f in [&amb, &w] {
            let doc = FieldDocument::from_field(f);
            let back = FieldDocument::from_json(&doc.to_json().unwrap()).unwrap().to_field().unwrap();
            assert_eq!(back.values(), f.values());
            assert_eq!(back.grid(), f.grid());
        }
    }

    #[test]
    fn kind_and_shape_are_checked() {
        let doc = FieldDocument::from_wavefunction(&psi());
        assert!(matches!(doc.to_density(), Err(Error::Document(_))));
        let mut broken = doc.clone();
        broken.schema_version = 99;
        assert!(matches!(broken.validate(), Err(Error::Document(_))));
        let mut short = doc.clone();
        if let DocumentData::Vector(v) = &mut short.data {
            v.pop();
        }
        assert!(matches!(short.validate(), Err(Error::Document(_))));
        let mut relabeled = doc;
        relabeled.axes[0].label = "p".into();
        assert!(relabeled.validate().is_err());
        assert!(FieldDocument::from_json("{\"schema_version\": 1}").is_err());
    }

    #[test]
    fn json_layout() {
        let doc = FieldDocument::from_wavefunction(&psi()).with_metadata("note", Value::from("x"));
        let v: Value = serde_json::from_str(&doc.to_json().unwrap()).unwrap();
        assert_eq!(v["kind"], "psi");
        assert_eq!(v["axes"][0]["label"], "q");
        assert_eq!(v["axes"][0]["count"], 32);
        assert_eq!(v["data"].as_array().unwrap().len(), 32);
        assert_eq!(v["data"][0].as_array().unwrap().len(), 2);
        assert_eq!(v["metadata"]["note"], "x");
    }

    #[test]
    fn csv_export() {
        let rho = density_from_wavefunction(&psi());
        let amb = ambiguity_from_density(&rho).unwrap();
        let csv = FieldDocument::from_field(&amb).to_csv().unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "axis1,axis2,re,im");
        assert_eq!(lines.len(), 1 + 32 * 32);
        let fields: Vec<f64> = lines[1].split(',').map(|s| s.parse().unwrap()).collect();
        assert_eq!(fields[0], amb.grid().axis1.value(0));
        assert_eq!(fields[2], amb.values()[[0, 0]].re);
        let csv = FieldDocument::from_wavefunction(&psi()).to_csv().unwrap();
        assert!(csv.lines().nth(1).unwrap().contains(",,"));
    }

    proptest! {
        #[test]
        fn numeric_payload_is_bit_exact(bits in proptest::collection::vec((any::<f64>(), any::<f64>()), 2..40), hbar in 1e-3f64..1e3) {
            let n = bits.len();
            let samples: Vec<Complex64> = bits
                .iter()
                .map(|&(a, b)| Complex64::new(if a.is_finite() { a } else { 0.0 }, if b.is_finite() { b } else { -0.0 }))
                .collect();
            let g = make_centered_grid(n, 0.1).unwrap();
            let psi = WaveFunction::new(g, samples.clone(), PhysicalConstants::new(hbar).unwrap()).unwrap();
            let doc = FieldDocument::from_wavefunction(&psi);
            let back = FieldDocument::from_json(&doc.to_json().unwrap()).unwrap();
            prop_assert_eq!(back.hbar.to_bits(), hbar.to_bits());
            for (x, y) in back.to_wavefunction().unwrap().samples().iter().zip(&samples) {
                prop_assert_eq!(x.re.to_bits(), y.re.to_bits());
                prop_assert_eq!(x.im.to_bits(), y.im.to_bits());
            }
        }
    }
}
