//! Brute-force wavefunction backend.
//!
//! A product state `ψ(q)Ψ(Q)` is pushed through the coordinate map of the
//! interaction, sampled on a 2-D grid, Fourier transformed to momentum space
//! and integrated back down to 1-D marginals. None of this relies on the
//! analytic output laws in [`crate::distribution`], which is the point.

use std::f64::consts::PI;
use std::io::{Read, Write};

use num_complex::Complex64;
use statrs::function::erf::erfc;

use crate::distribution::{GriddedDistribution, MomentSummary, NORMALIZATION_TOLERANCE};
use crate::error::{Error, Result};
use crate::exec;
use crate::fourier::{conjugate_axis, AxisTransform, KernelSign};
use crate::interaction::{InteractionParams, LinearMap};
use crate::Hbar;

/// Points per axis of the joint grid.
pub const DEFAULT_JOINT_POINTS: usize = 1 << 10;
/// Points of a 1-D input wavefunction.
pub const DEFAULT_INPUT_POINTS: usize = 1 << 14;
/// Half-width of a default input grid, in standard deviations.
pub const INPUT_SPAN_SIGMAS: f64 = 12.0;
/// Minimum half-width accepted by [`Wavefunction1D::gaussian_packet`].
pub const MIN_PACKET_SPAN_SIGMAS: f64 = 8.0;
/// Probability that may fall outside a sampled window.
pub const TRUNCATION_TOLERANCE: f64 = 1e-9;

const MAGIC: &[u8; 4] = b"QMO1";

/// A uniform grid `origin + i·step`, `i < count`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub origin: f64,
    pub step: f64,
    pub count: usize,
}

impl Axis {
    pub fn new(origin: f64, step: f64, count: usize) -> Result<Self> {
        if !(step > 0.0) || !step.is_finite() || !origin.is_finite() || count < 2 {
            return Err(Error::InvalidWavefunction(format!("bad axis (origin {origin}, step {step}, count {count})")));
        }
        Ok(Self { origin, step, count })
    }

    /// `count` points with `center` at index `count/2`.
    pub fn centered(center: f64, step: f64, count: usize) -> Result<Self> {
        Self::new(center - (count / 2) as f64 * step, step, count)
    }

    /// `count` points spanning `[center − half_width, center + half_width)`.
    pub fn spanning(center: f64, half_width: f64, count: usize) -> Result<Self> {
        Self::centered(center, 2.0 * half_width / count as f64, count)
    }

    pub fn coordinate(&self, i: usize) -> f64 {
        self.origin + self.step * i as f64
    }

    pub fn end(&self) -> f64 {
        self.coordinate(self.count - 1)
    }

    /// The coordinate at index `count/2`, inverse of [`Axis::centered`].
    pub fn center(&self) -> f64 {
        self.coordinate(self.count / 2)
    }
}

fn moments_of(axis: &Axis, density: impl Iterator<Item = f64> + Clone) -> MomentSummary {
    let mass: f64 = density.clone().sum();
    let mean = density.clone().enumerate().map(|(i, w)| axis.coordinate(i) * w).sum::<f64>() / mass;
    let variance = density.enumerate().map(|(i, w)| (axis.coordinate(i) - mean).powi(2) * w).sum::<f64>() / mass;
    MomentSummary { mean, variance }
}

fn lerp(values: &[Complex64], axis: &Axis, x: f64) -> Complex64 {
    let t = (x - axis.origin) / axis.step;
    let last = (axis.count - 1) as f64;
    if !(t >= 0.0) || t > last {
        return Complex64::new(0.0, 0.0);
    }
    let i = t.floor() as usize;
    if i + 1 >= axis.count {
        return values[axis.count - 1];
    }
    let frac = t - i as f64;
    values[i] * (1.0 - frac) + values[i + 1] * frac
}

/// A sampled single-particle amplitude.
#[derive(Debug, Clone, PartialEq)]
pub struct Wavefunction1D {
    axis: Axis,
    amplitudes: Vec<Complex64>,
}

impl Wavefunction1D {
    pub fn new(origin: f64, step: f64, amplitudes: Vec<Complex64>) -> Result<Self> {
        let axis = Axis::new(origin, step, amplitudes.len())?;
        let psi = Self { axis, amplitudes };
        let norm = psi.norm();
        if (norm - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return Err(Error::InvalidWavefunction(format!("norm {norm} is not 1")));
        }
        Ok(psi)
    }

    /// Default input grid for a packet: [`DEFAULT_INPUT_POINTS`] samples over
    /// `mean ± 12σ`.
    pub fn default_axis(mean_x: f64, sigma: f64) -> Result<Axis> {
        Axis::spanning(mean_x, INPUT_SPAN_SIGMAS * sigma, DEFAULT_INPUT_POINTS)
    }

    /// `(2πσ²)^{−1/4} e^{−(x−x₀)²/4σ²} e^{i k₀ x/ħ}`, renormalized on the grid.
    pub fn gaussian_packet(mean_x: f64, sigma: f64, mean_k: f64, axis: Axis, hbar: Hbar) -> Result<Self> {
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::InvalidState(format!("packet width must be positive, got {sigma}")));
        }
        let reach = MIN_PACKET_SPAN_SIGMAS * sigma;
        if axis.origin > mean_x - reach || axis.end() < mean_x + reach {
            return Err(Error::GridTooNarrow(format!(
                "packet at {mean_x} with σ = {sigma} needs [{}, {}], grid covers [{}, {}]",
                mean_x - reach,
                mean_x + reach,
                axis.origin,
                axis.end()
            )));
        }
        let norm = (2.0 * PI * sigma * sigma).powf(-0.25);
        let mut amplitudes: Vec<Complex64> = (0..axis.count)
            .map(|i| {
                let x = axis.coordinate(i);
                let z = (x - mean_x) / sigma;
                Complex64::from_polar(norm * (-0.25 * z * z).exp(), mean_k * x / hbar.value())
            })
            .collect();
        let total: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>() * axis.step;
        let fix = total.sqrt().recip();
        amplitudes.iter_mut().for_each(|a| *a *= fix);
        Ok(Self { axis, amplitudes })
    }

    pub fn axis(&self) -> Axis {
        self.axis
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>() * self.axis.step
    }

    /// Linear interpolation of the amplitude; zero off the grid.
    pub fn value_at(&self, x: f64) -> Complex64 {
        lerp(&self.amplitudes, &self.axis, x)
    }

    pub fn density(&self) -> Result<GriddedDistribution> {
        GriddedDistribution::new(
            self.axis.origin,
            self.axis.step,
            self.amplitudes.iter().map(|a| a.norm_sqr()).collect(),
        )
    }

    pub fn position_moments(&self) -> MomentSummary {
        moments_of(&self.axis, self.amplitudes.iter().map(|a| a.norm_sqr()))
    }

    /// The amplitude on the conjugate axis centered on `center`.
    pub fn momentum_representation(&self, hbar: Hbar, center: f64, sign: KernelSign) -> Self {
        let to = conjugate_axis(&self.axis, hbar, center);
        let mut amplitudes = self.amplitudes.clone();
        AxisTransform::new(&self.axis, &to, hbar, sign).apply(&mut amplitudes);
        Self { axis: to, amplitudes }
    }

    pub fn momentum_moments(&self, hbar: Hbar) -> MomentSummary {
        self.momentum_representation(hbar, 0.0, KernelSign::Negative).position_moments()
    }

    /// Probability within one step of either end of the grid.
    fn edge_mass(&self) -> f64 {
        let n = self.axis.count;
        (self.amplitudes[0].norm_sqr() + self.amplitudes[n - 1].norm_sqr()) * self.axis.step
    }
}

/// Analytic momentum amplitude of [`Wavefunction1D::gaussian_packet`] under the
/// `e^{−ixp/ħ}/√(2πħ)` kernel.
pub fn gaussian_momentum_amplitude(mean_x: f64, sigma: f64, mean_k: f64, hbar: Hbar, p: f64) -> Complex64 {
    let h = hbar.value();
    let norm = (2.0 * PI * sigma * sigma).powf(-0.25) * (4.0 * PI * sigma * sigma).sqrt() / (2.0 * PI * h).sqrt();
    let dp = p - mean_k;
    Complex64::from_polar(norm * (-(sigma * dp / h).powi(2)).exp(), -dp * mean_x / h)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Basis {
    Position,
    Momentum,
}

/// The two sample axes of a joint state plus the centers of their conjugates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointAxes {
    /// Object axis (`q` or `p`), the slow index.
    pub first: Axis,
    /// Probe axis (`Q` or `P`), the fast index.
    pub second: Axis,
    /// Centers of the axes a Fourier transform lands on.
    pub conjugate_centers: [f64; 2],
}

/// A sampled two-particle amplitude stored row-major (`first` varies slowest).
#[derive(Debug, Clone, PartialEq)]
pub struct JointWavefunction {
    axes: JointAxes,
    basis: Basis,
    amplitudes: Vec<Complex64>,
}

impl JointWavefunction {
    pub fn new(axes: JointAxes, basis: Basis, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != axes.first.count * axes.second.count {
            return Err(Error::InvalidWavefunction(format!(
                "{} amplitudes for a {}×{} grid",
                amplitudes.len(),
                axes.first.count,
                axes.second.count
            )));
        }
        let joint = Self { axes, basis, amplitudes };
        let norm = joint.norm();
        if (norm - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return Err(Error::InvalidWavefunction(format!("norm {norm} is not 1")));
        }
        Ok(joint)
    }

    /// `ψ(q)Ψ(Q)` sampled on the input grids.
    pub fn product(object: &Wavefunction1D, probe: &Wavefunction1D) -> Self {
        let width = probe.axis.count;
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); object.axis.count * width];
        exec::for_each_row(&mut amplitudes, width, |i, row| {
            let a = object.amplitudes[i];
            for (dst, b) in row.iter_mut().zip(&probe.amplitudes) {
                *dst = a * b;
            }
        });
        let axes = JointAxes { first: object.axis, second: probe.axis, conjugate_centers: [0.0, 0.0] };
        Self { axes, basis: Basis::Position, amplitudes }
    }

    pub fn axes(&self) -> JointAxes {
        self.axes
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitude(&self, i: usize, j: usize) -> Complex64 {
        self.amplitudes[i * self.axes.second.count + j]
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>() * self.axes.first.step * self.axes.second.step
    }

    /// Applies a transform along both axes.
    fn transform_2d(&self, to: (Axis, Axis), hbar: Hbar, sign: KernelSign) -> Vec<Complex64> {
        let (rows, cols) = (self.axes.first.count, self.axes.second.count);
        let along_rows = AxisTransform::new(&self.axes.second, &to.1, hbar, sign);
        let along_cols = AxisTransform::new(&self.axes.first, &to.0, hbar, sign);
        let mut data = self.amplitudes.clone();
        exec::for_each_row(&mut data, cols, |_, row| along_rows.apply(row));
        let mut transposed = transpose(&data, rows, cols);
        exec::for_each_row(&mut transposed, rows, |_, col| along_cols.apply(col));
        transpose(&transposed, cols, rows)
    }

    /// `Φ'(p, P)` with the `e^{−i(qp + QP)/ħ}/(2πħ)` kernel.
    pub fn momentum_representation(&self, hbar: Hbar) -> Self {
        self.momentum_representation_with_sign(hbar, KernelSign::Negative)
    }

    /// As [`Self::momentum_representation`] with a chosen kernel sign.
    ///
    /// [`KernelSign::Positive`] is a deliberate fault for sensitivity tests.
    pub fn momentum_representation_with_sign(&self, hbar: Hbar, sign: KernelSign) -> Self {
        let [c0, c1] = self.axes.conjugate_centers;
        let to = (conjugate_axis(&self.axes.first, hbar, c0), conjugate_axis(&self.axes.second, hbar, c1));
        let amplitudes = self.transform_2d(to, hbar, sign);
        let axes = JointAxes {
            first: to.0,
            second: to.1,
            conjugate_centers: [self.axes.first.center(), self.axes.second.center()],
        };
        let basis = match self.basis {
            Basis::Position => Basis::Momentum,
            Basis::Momentum => Basis::Position,
        };
        Self { axes, basis, amplitudes }
    }

    /// Inverse of [`Self::momentum_representation`].
    pub fn position_representation(&self, hbar: Hbar) -> Self {
        self.momentum_representation_with_sign(hbar, KernelSign::Positive)
    }

    /// Densities of the first and second coordinate.
    pub fn marginals(&self) -> Result<(GriddedDistribution, GriddedDistribution)> {
        let (rows, cols) = (self.axes.first.count, self.axes.second.count);
        let (h0, h1) = (self.axes.first.step, self.axes.second.step);
        let first = exec::map_range(rows, |i| {
            self.amplitudes[i * cols..(i + 1) * cols].iter().map(|a| a.norm_sqr()).sum::<f64>() * h1
        });
        let second =
            exec::map_range(cols, |j| (0..rows).map(|i| self.amplitudes[i * cols + j].norm_sqr()).sum::<f64>() * h0);
        Ok((
            GriddedDistribution::new(self.axes.first.origin, h0, first)?,
            GriddedDistribution::new(self.axes.second.origin, h1, second)?,
        ))
    }

    /// Binary form: `QMO1`, two `(origin f64, step f64, count u32)` triples,
    /// then interleaved `re, im` pairs, all little-endian.
    pub fn write_binary<W: Write>(&self, mut out: W) -> Result<()> {
        out.write_all(MAGIC)?;
        for axis in [self.axes.first, self.axes.second] {
            let count = u32::try_from(axis.count)
                .map_err(|_| Error::InvalidWavefunction(format!("axis of {} points", axis.count)))?;
            out.write_all(&axis.origin.to_le_bytes())?;
            out.write_all(&axis.step.to_le_bytes())?;
            out.write_all(&count.to_le_bytes())?;
        }
        let mut buf = Vec::with_capacity(16 * self.amplitudes.len());
        for a in &self.amplitudes {
            buf.extend_from_slice(&a.re.to_le_bytes());
            buf.extend_from_slice(&a.im.to_le_bytes());
        }
        out.write_all(&buf)?;
        Ok(())
    }

    /// Reads [`Self::write_binary`] output as a position-basis state with
    /// conjugate axes centered on zero.
    pub fn read_binary<R: Read>(mut input: R) -> Result<Self> {
        let mut magic = [0u8; 4];
        input.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Parse(format!("bad magic {magic:?}")));
        }
        let mut f8 = [0u8; 8];
        let mut u4 = [0u8; 4];
        let mut axis = || -> Result<Axis> {
            input.read_exact(&mut f8)?;
            let origin = f64::from_le_bytes(f8);
            input.read_exact(&mut f8)?;
            let step = f64::from_le_bytes(f8);
            input.read_exact(&mut u4)?;
            Axis::new(origin, step, u32::from_le_bytes(u4) as usize)
        };
        let first = axis()?;
        let second = axis()?;
        let n = first.count * second.count;
        let mut bytes = Vec::with_capacity(16 * n);
        input.read_to_end(&mut bytes)?;
        if bytes.len() != 16 * n {
            return Err(Error::Parse(format!("expected {} amplitude bytes, found {}", 16 * n, bytes.len())));
        }
        let amplitudes = bytes
            .chunks_exact(16)
            .map(|c| {
                let re = f64::from_le_bytes(c[..8].try_into().unwrap());
                let im = f64::from_le_bytes(c[8..].try_into().unwrap());
                Complex64::new(re, im)
            })
            .collect();
        Self::new(JointAxes { first, second, conjugate_centers: [0.0, 0.0] }, Basis::Position, amplitudes)
    }
}

fn transpose(data: &[Complex64], rows: usize, cols: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); data.len()];
    exec::for_each_row(&mut out, rows, |j, dst| {
        for (i, d) in dst.iter_mut().enumerate() {
            *d = data[i * cols + j];
        }
    });
    out
}

/// A product state seen through a chain of linear coordinate maps.
///
/// Amplitudes are evaluated on demand by pulling each point back to the input
/// grids, so composing a map with its inverse loses nothing beyond rounding.
#[derive(Debug, Clone)]
pub struct MappedProductState<'a> {
    object: &'a Wavefunction1D,
    probe: &'a Wavefunction1D,
    /// Sends current coordinates back to `(q, Q)`.
    pre_image: LinearMap,
    scale: f64,
}

impl<'a> MappedProductState<'a> {
    pub fn product(object: &'a Wavefunction1D, probe: &'a Wavefunction1D) -> Self {
        Self { object, probe, pre_image: LinearMap::new([[1.0, 0.0], [0.0, 1.0]]), scale: 1.0 }
    }

    /// `Ψ ↦ |det M|^{−1/2} Ψ(M⁻¹ ·)`, the unitary induced by `x ↦ Mx`.
    pub fn then(&self, map: &LinearMap) -> Self {
        Self {
            pre_image: self.pre_image.compose(&map.inverse()),
            scale: self.scale / map.determinant().abs().sqrt(),
            ..self.clone()
        }
    }

    pub fn amplitude(&self, x: f64, y: f64) -> Complex64 {
        let (q, big_q) = self.pre_image.apply(x, y);
        self.object.value_at(q) * self.probe.value_at(big_q) * self.scale
    }

    pub fn sample(&self, axes: JointAxes) -> JointWavefunction {
        let width = axes.second.count;
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); axes.first.count * width];
        exec::for_each_row(&mut amplitudes, width, |i, row| {
            let x = axes.first.coordinate(i);
            for (j, dst) in row.iter_mut().enumerate() {
                *dst = self.amplitude(x, axes.second.coordinate(j));
            }
        });
        JointWavefunction { axes, basis: Basis::Position, amplitudes }
    }
}

/// Means and standard deviations of the four output observables of a
/// product state, propagated through the Heisenberg map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutputSpread {
    /// `(mean, σ)` of `q'`, `Q'`, `p'`, `P'`.
    pub q: (f64, f64),
    pub big_q: (f64, f64),
    pub p: (f64, f64),
    pub big_p: (f64, f64),
}

impl OutputSpread {
    pub fn of(params: &InteractionParams, object: &Wavefunction1D, probe: &Wavefunction1D, hbar: Hbar) -> Self {
        let (q, p) = (object.position_moments(), object.momentum_moments(hbar));
        let (bq, bp) = (probe.position_moments(), probe.momentum_moments(hbar));
        let combine = |u: f64, x: MomentSummary, v: f64, y: MomentSummary| {
            (u * x.mean + v * y.mean, (u * u * x.variance + v * v * y.variance).sqrt())
        };
        let (a, b, c, d) = (params.a(), params.b(), params.c(), params.d());
        let (a_p, b_p, c_p, d_p) = (params.a_p(), params.b_p(), params.c_p(), params.d_p());
        Self {
            q: combine(d, q, c, bq),
            big_q: combine(b, q, a, bq),
            p: combine(a_p, p, -b_p, bp),
            big_p: combine(-c_p, p, d_p, bp),
        }
    }

    /// Grids with `n` points per axis whose position and momentum windows
    /// cover the same number of standard deviations.
    pub fn balanced_axes(&self, n: usize, hbar: Hbar) -> Result<JointAxes> {
        let axis = |x: (f64, f64), k: (f64, f64)| {
            let step = (2.0 * PI * hbar.value() * x.1 / (n as f64 * k.1)).sqrt();
            Axis::centered(x.0, step, n)
        };
        Ok(JointAxes {
            first: axis(self.q, self.p)?,
            second: axis(self.big_q, self.big_p)?,
            conjugate_centers: [self.p.0, self.big_p.0],
        })
    }

    /// Gaussian-tail estimate of the probability falling outside `axes` in
    /// position or momentum.
    pub fn truncated_mass(&self, axes: &JointAxes, hbar: Hbar) -> f64 {
        let tail = |(mean, sd): (f64, f64), axis: &Axis| {
            let lo = (mean - axis.origin) / (sd * std::f64::consts::SQRT_2);
            let hi = (axis.end() - mean) / (sd * std::f64::consts::SQRT_2);
            0.5 * (erfc(lo) + erfc(hi))
        };
        let p_axis = conjugate_axis(&axes.first, hbar, axes.conjugate_centers[0]);
        let big_p_axis = conjugate_axis(&axes.second, hbar, axes.conjugate_centers[1]);
        tail(self.q, &axes.first)
            + tail(self.big_q, &axes.second)
            + tail(self.p, &p_axis)
            + tail(self.big_p, &big_p_axis)
    }
}

/// `Ψ'(q', Q') = Δ^{−1/2} ψ((aq' − cQ')/Δ) Ψ((dQ' − bq')/Δ)` on balanced grids
/// of `n` points per axis.
pub fn apply_interaction(
    params: &InteractionParams,
    object: &Wavefunction1D,
    probe: &Wavefunction1D,
    hbar: Hbar,
    n: usize,
) -> Result<JointWavefunction> {
    let axes = OutputSpread::of(params, object, probe, hbar).balanced_axes(n, hbar)?;
    apply_interaction_on(params, object, probe, axes, hbar)
}

/// [`apply_interaction`] on caller-chosen axes.
pub fn apply_interaction_on(
    params: &InteractionParams,
    object: &Wavefunction1D,
    probe: &Wavefunction1D,
    axes: JointAxes,
    hbar: Hbar,
) -> Result<JointWavefunction> {
    for (name, psi) in [("object", object), ("probe", probe)] {
        let edge = psi.edge_mass();
        if edge > TRUNCATION_TOLERANCE {
            return Err(Error::GridTooNarrow(format!("{name} input carries {edge:e} at its grid edge")));
        }
    }
    let lost = OutputSpread::of(params, object, probe, hbar).truncated_mass(&axes, hbar);
    if lost > TRUNCATION_TOLERANCE {
        return Err(Error::GridTooNarrow(format!("output grid truncates an estimated {lost:e} of probability")));
    }
    Ok(MappedProductState::product(object, probe).then(&params.coordinate_map()).sample(axes))
}
