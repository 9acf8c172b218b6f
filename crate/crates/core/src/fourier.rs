//! Fourier transforms on uniform grids with the kernel `e^{∓ixk/ħ}/√(2πħ)`.
//!
//! A transform maps samples on a position axis `x_j = x₀ + j·h` to a momentum
//! axis `k_m = k₀ + m·Δk` with `h·Δk·N = 2πħ`, so that the continuous integral
//! reduces exactly to one FFT plus two phase ramps.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};

use crate::oracle::Axis;
use crate::Hbar;

/// Sign of the exponent in the forward (position → momentum) kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KernelSign {
    /// `e^{−ixk/ħ}`, the convention every formula in this crate assumes.
    #[default]
    Negative,
    /// `e^{+ixk/ħ}`. Only useful for checking that the test suites notice a
    /// reflected momentum axis.
    Positive,
}

impl KernelSign {
    fn value(self) -> f64 {
        match self {
            KernelSign::Negative => -1.0,
            KernelSign::Positive => 1.0,
        }
    }

    fn flipped(self) -> Self {
        match self {
            KernelSign::Negative => KernelSign::Positive,
            KernelSign::Positive => KernelSign::Negative,
        }
    }
}

/// The axis conjugate to `axis`, centered on `center`.
pub fn conjugate_axis(axis: &Axis, hbar: Hbar, center: f64) -> Axis {
    let n = axis.count;
    let step = 2.0 * PI * hbar.value() / (n as f64 * axis.step);
    Axis { origin: center - (n / 2) as f64 * step, step, count: n }
}

/// A planned transform between two conjugate axes.
pub struct AxisTransform {
    fft: Arc<dyn Fft<f64>>,
    pre: Vec<Complex64>,
    post: Vec<Complex64>,
}

impl AxisTransform {
    /// Transform from `from` to `to` with kernel sign `sign`.
    ///
    /// `to` must be conjugate to `from` (same count, `h·Δk·N = 2πħ`).
    pub fn new(from: &Axis, to: &Axis, hbar: Hbar, sign: KernelSign) -> Self {
        let n = from.count;
        assert_eq!(n, to.count, "conjugate axes must have equal length");
        let h = hbar.value();
        debug_assert!(((from.step * to.step * n as f64) / (2.0 * PI * h) - 1.0).abs() < 1e-9, "axes are not conjugate");
        let s = sign.value();
        let direction = match sign {
            KernelSign::Negative => FftDirection::Forward,
            KernelSign::Positive => FftDirection::Inverse,
        };
        let fft = FftPlanner::new().plan_fft(n, direction);
        let pre = (0..n).map(|j| Complex64::from_polar(1.0, s * j as f64 * from.step * to.origin / h)).collect();
        let norm = from.step / (2.0 * PI * h).sqrt();
        let post = (0..n).map(|m| Complex64::from_polar(norm, s * from.origin * to.coordinate(m) / h)).collect();
        Self { fft, pre, post }
    }

    /// Planned transforms `from → to` and back again.
    pub fn pair(from: &Axis, to: &Axis, hbar: Hbar, sign: KernelSign) -> (Self, Self) {
        (Self::new(from, to, hbar, sign), Self::new(to, from, hbar, sign.flipped()))
    }

    pub fn len(&self) -> usize {
        self.pre.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pre.is_empty()
    }

    /// Transforms `data` in place.
    pub fn apply(&self, data: &mut [Complex64]) {
        assert_eq!(data.len(), self.len());
        for (x, p) in data.iter_mut().zip(&self.pre) {
            *x *= p;
        }
        self.fft.process(data);
        for (x, p) in data.iter_mut().zip(&self.post) {
            *x *= p;
        }
    }
}

/// Linear convolution of two real sequences through a zero-padded FFT.
///
/// Returns `len(f) + len(g) − 1` values of `Σ_j f[j] g[k − j]`.
pub fn fft_convolve(f: &[f64], g: &[f64]) -> Vec<f64> {
    let out_len = f.len() + g.len() - 1;
    let n = out_len.next_power_of_two();
    let mut planner = FftPlanner::new();
    let forward = planner.plan_fft_forward(n);
    let inverse = planner.plan_fft_inverse(n);
    // Pack f into the real part and g into the imaginary part and unpack
    // their spectra from the Hermitian symmetry.
    let mut z = vec![Complex64::new(0.0, 0.0); n];
    for (zi, &x) in z.iter_mut().zip(f) {
        zi.re = x;
    }
    for (zi, &x) in z.iter_mut().zip(g) {
        zi.im = x;
    }
    forward.process(&mut z);
    let mut prod = vec![Complex64::new(0.0, 0.0); n];
    for k in 0..n {
        let zk = z[k];
        let zc = z[(n - k) % n].conj();
        let fk = (zk + zc) * 0.5;
        let gk = (zk - zc) * Complex64::new(0.0, -0.5);
        prod[k] = fk * gk;
    }
    inverse.process(&mut prod);
    let scale = 1.0 / n as f64;
    prod.truncate(out_len);
    prod.into_iter().map(|c| c.re * scale).collect()
}
