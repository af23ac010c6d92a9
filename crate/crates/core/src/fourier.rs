//! Discrete Fourier sums on offset uniform lattices.
//!
//! Every transform in the crate approximates a continuum integral
//! `int dx exp(+-i k x / hbar) f(x)` on lattices `x_j = x0 + j dx`,
//! `k_a = k0 + a dk` with `N dx dk = 2 pi hbar`. The non-zero origins are
//! absorbed into explicit pre- and post-phases around a plain FFT.

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::f64::consts::PI;
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Sign {
    Plus,
    Minus,
}

impl Sign {
    fn as_f64(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// FFT plans for one transform length.
#[derive(Clone)]
pub(crate) struct Dft {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl Dft {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            n,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    /// In place: `buf[a] <- sum_j exp(sign i (k0 + a dk)(x0 + j dx) / hbar) buf[j]`.
    ///
    /// `dk` is implied by `N dx dk = 2 pi hbar`.
    pub fn apply(&self, buf: &mut [Complex64], x0: f64, dx: f64, k0: f64, sign: Sign, hbar: f64) {
        debug_assert_eq!(buf.len(), self.n);
        let s = sign.as_f64();
        let dk = 2.0 * PI * hbar / (self.n as f64 * dx);
        for (j, z) in buf.iter_mut().enumerate() {
            *z *= Complex64::from_polar(1.0, s * k0 * j as f64 * dx / hbar);
        }
        match sign {
            Sign::Minus => self.forward.process(buf),
            Sign::Plus => self.inverse.process(buf),
        }
        for (a, z) in buf.iter_mut().enumerate() {
            *z *= Complex64::from_polar(1.0, s * (k0 + a as f64 * dk) * x0 / hbar);
        }
    }

    /// Treat `row` (samples at `x0 + j dx`) as a trigonometric sum
    /// `sum_k G_k exp(i kappa_k x / hbar)` with `kappa_k = kappa0 + k dkappa`,
    /// multiply each `G_k` by `m(kappa_k)` and resample.
    pub fn spectral_multiply(
        &self,
        row: &mut [Complex64],
        x0: f64,
        dx: f64,
        kappa0: f64,
        hbar: f64,
        m: impl Fn(f64) -> Complex64,
    ) {
        let n = self.n as f64;
        let dkappa = 2.0 * PI * hbar / (n * dx);
        self.apply(row, x0, dx, kappa0, Sign::Minus, hbar);
        for (k, z) in row.iter_mut().enumerate() {
            *z *= m(kappa0 + k as f64 * dkappa) / n;
        }
        // back from the conjugate lattice to x
        self.apply(row, kappa0, dkappa, x0, Sign::Plus, hbar);
    }
}

/// Repeated spectral multiplication along rows of one lattice `x_j = x0 + j dx`.
///
/// A row is a sum over `kappa_k = kappa0 + k dkappa`; its carrier
/// `exp(i kappa0 x_j / hbar)` depends on `kappa0` only and can be cached per
/// row, after which each multiplication costs two plain FFTs.
#[derive(Clone)]
pub(crate) struct RowSpectrum {
    n: usize,
    x0: f64,
    dx: f64,
    hbar: f64,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl RowSpectrum {
    pub fn new(n: usize, x0: f64, dx: f64, hbar: f64) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            n,
            x0,
            dx,
            hbar,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    pub fn dkappa(&self) -> f64 {
        2.0 * PI * self.hbar / (self.n as f64 * self.dx)
    }

    pub fn carrier(&self, kappa0: f64) -> Vec<Complex64> {
        (0..self.n)
            .map(|j| Complex64::from_polar(1.0, kappa0 * (self.x0 + j as f64 * self.dx) / self.hbar))
            .collect()
    }

    /// Multiplier for mode `k` is `m[k]`; `out` receives the resampled row.
    pub fn multiply(&self, row: &[Complex64], carrier: &[Complex64], m: &[Complex64], out: &mut [Complex64]) {
        let scale = 1.0 / self.n as f64;
        for ((o, r), c) in out.iter_mut().zip(row).zip(carrier) {
            *o = r * c.conj();
        }
        self.forward.process(out);
        for (o, w) in out.iter_mut().zip(m) {
            *o *= w * scale;
        }
        self.inverse.process(out);
        for (o, c) in out.iter_mut().zip(carrier) {
            *o *= c;
        }
    }
}
