//! Sampled probability densities and the transformation laws they obey under
//! a linear measurement interaction.
//!
//! Densities live on uniform grids and integrals use the midpoint rule. The
//! rescaling `f_k(x) = k·f(kx)` is exact on a grid (it only relabels the
//! axis), so the composed output laws lose accuracy only in convolutions and
//! in the linear interpolation needed to bring two grids to a common step.

use std::io::{BufRead, Write};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec;
use crate::fourier::fft_convolve;
use crate::interaction::InteractionParams;
use crate::moments::{gain_referred_from_widths, GainReferred, ObjectStateSpec, ProbeStateSpec};

pub const MIN_SAMPLES: usize = 16;
pub const NORMALIZATION_TOLERANCE: f64 = 1e-6;
/// Edge mass that may be silently dropped when a grid is zero-extended.
pub const TAIL_MASS_TOLERANCE: f64 = 1e-12;
/// Direct summation is used up to this many output samples.
pub const DIRECT_CONVOLUTION_LIMIT: usize = 4096;
/// Largest grid any operation will allocate.
pub const MAX_GRID_POINTS: usize = 1 << 23;
pub const DEFAULT_GRID_POINTS: usize = 1 << 12;
pub const DEFAULT_SPAN_SIGMAS: f64 = 10.0;

const STEP_MATCH: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentSummary {
    pub mean: f64,
    pub variance: f64,
}

impl MomentSummary {
    pub fn std_dev(&self) -> f64 {
        self.variance.sqrt()
    }
}

/// A nonnegative density sampled at `origin + i·step`.
#[derive(Debug, Clone, PartialEq)]
pub struct GriddedDistribution {
    origin: f64,
    step: f64,
    values: Vec<f64>,
}

impl GriddedDistribution {
    pub fn new(origin: f64, step: f64, values: Vec<f64>) -> Result<Self> {
        let d = Self { origin, step, values };
        d.validate()?;
        Ok(d)
    }

    /// Samples `density` at `n` points starting at `origin`.
    pub fn sample<F: Fn(f64) -> f64>(origin: f64, step: f64, n: usize, density: F) -> Result<Self> {
        let values = (0..n).map(|i| density(origin + step * i as f64)).collect();
        Self::new(origin, step, values)
    }

    /// Normal density on `n` points spanning `mean ± span_sigmas·sigma`.
    pub fn gaussian(mean: f64, sigma: f64, n: usize, span_sigmas: f64) -> Result<Self> {
        if !(sigma > 0.0) || !(span_sigmas > 0.0) || n < MIN_SAMPLES {
            return Err(Error::InvalidDistribution(format!(
                "gaussian needs sigma > 0, span > 0 and n ≥ {MIN_SAMPLES}"
            )));
        }
        let half = span_sigmas * sigma;
        let step = 2.0 * half / (n - 1) as f64;
        let norm = 1.0 / (sigma * (2.0 * std::f64::consts::PI).sqrt());
        Self::sample(mean - half, step, n, |x| {
            let z = (x - mean) / sigma;
            norm * (-0.5 * z * z).exp()
        })
    }

    /// Uniform density on `[lo, hi]`, sampled at `n` cell midpoints.
    pub fn uniform(lo: f64, hi: f64, n: usize) -> Result<Self> {
        if !(hi > lo) {
            return Err(Error::InvalidDistribution("uniform needs hi > lo".into()));
        }
        let step = (hi - lo) / n as f64;
        Self::new(lo + 0.5 * step, step, vec![1.0 / (hi - lo); n])
    }

    fn validate(&self) -> Result<()> {
        if !(self.step > 0.0) || !self.step.is_finite() || !self.origin.is_finite() {
            return Err(Error::InvalidDistribution(format!(
                "step must be positive and finite (origin {}, step {})",
                self.origin, self.step
            )));
        }
        if self.values.len() < MIN_SAMPLES {
            return Err(Error::InvalidDistribution(format!(
                "{} samples, at least {MIN_SAMPLES} required",
                self.values.len()
            )));
        }
        if let Some(v) = self.values.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
            return Err(Error::InvalidDistribution(format!("invalid density sample {v}")));
        }
        let mass = self.mass();
        if (mass - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return Err(Error::InvalidDistribution(format!("total mass {mass} is not 1")));
        }
        Ok(())
    }

    pub fn origin(&self) -> f64 {
        self.origin
    }
    pub fn step(&self) -> f64 {
        self.step
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    pub fn len(&self) -> usize {
        self.values.len()
    }
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
    pub fn coordinate(&self, i: usize) -> f64 {
        self.origin + self.step * i as f64
    }
    /// Coordinate of the last sample.
    pub fn end(&self) -> f64 {
        self.coordinate(self.len() - 1)
    }

    pub fn mass(&self) -> f64 {
        self.step * self.values.iter().sum::<f64>()
    }

    pub fn moments(&self) -> MomentSummary {
        let mass = self.mass();
        let mean = self.values.iter().enumerate().map(|(i, v)| self.coordinate(i) * v).sum::<f64>() * self.step / mass;
        let variance =
            self.values.iter().enumerate().map(|(i, v)| (self.coordinate(i) - mean).powi(2) * v).sum::<f64>()
                * self.step
                / mass;
        MomentSummary { mean, variance }
    }

    /// Linear interpolation; zero outside the sampled range.
    pub fn value_at(&self, x: f64) -> f64 {
        let t = (x - self.origin) / self.step;
        if !(t >= 0.0) || t > (self.len() - 1) as f64 {
            return 0.0;
        }
        let i = t.floor() as usize;
        if i + 1 >= self.len() {
            return self.values[self.len() - 1];
        }
        let frac = t - i as f64;
        self.values[i] * (1.0 - frac) + self.values[i + 1] * frac
    }

    /// Probability mass carried by the first and last samples.
    fn edge_masses(&self) -> (f64, f64) {
        (self.values[0] * self.step, self.values[self.len() - 1] * self.step)
    }

    /// Errors if zero-extending over `[lo, hi]` would drop real mass.
    fn check_extension(&self, lo: f64, hi: f64) -> Result<()> {
        let (left, right) = self.edge_masses();
        let slack = 1e-9 * self.step;
        if lo < self.origin - slack && left > TAIL_MASS_TOLERANCE {
            return Err(Error::Extrapolation { mass: left });
        }
        if hi > self.end() + slack && right > TAIL_MASS_TOLERANCE {
            return Err(Error::Extrapolation { mass: right });
        }
        Ok(())
    }

    /// Cubic (Keys) interpolation; zero outside the sampled range.
    ///
    /// Unlike [`Self::value_at`] this keeps the first two moments of a smooth
    /// density intact to high order, which matters when a grid is refined.
    fn cubic_at(&self, x: f64) -> f64 {
        let t = (x - self.origin) / self.step;
        if !(t >= 0.0) || t > (self.len() - 1) as f64 {
            return 0.0;
        }
        let i = t.floor() as i64;
        let u = t - i as f64;
        let sample = |k: i64| {
            if k >= 0 && (k as usize) < self.len() {
                self.values[k as usize]
            } else {
                0.0
            }
        };
        let weights = keys_weights(u);
        let v: f64 = (0..4).map(|k| weights[k] * sample(i - 1 + k as i64)).sum();
        v.max(0.0)
    }

    /// Resamples onto `n` points at `origin + i·step`.
    ///
    /// Uses cubic interpolation. When the new grid covers the old one the
    /// result is rescaled to the original mass.
    pub fn resample(&self, origin: f64, step: f64, n: usize) -> Result<Self> {
        if n > MAX_GRID_POINTS {
            return Err(Error::GridResolution { needed: n, limit: MAX_GRID_POINTS });
        }
        let end = origin + step * (n.max(1) - 1) as f64;
        self.check_extension(origin, end)?;
        let mut values = exec::map_range(n, |i| self.cubic_at(origin + step * i as f64));
        let covers = origin <= self.origin + step && end >= self.end() - step;
        let mass = step * values.iter().sum::<f64>();
        if covers && mass > 0.0 {
            let fix = self.mass() / mass;
            values.iter_mut().for_each(|v| *v *= fix);
        }
        Ok(Self { origin, step, values })
    }

    /// Resamples onto a finer `step` over the same range.
    fn refine(&self, step: f64) -> Result<Self> {
        let span = self.end() - self.origin;
        let n = (span / step * (1.0 + 1e-12)).floor() as usize + 1;
        if n > MAX_GRID_POINTS {
            return Err(Error::GridResolution { needed: n, limit: MAX_GRID_POINTS });
        }
        self.resample(self.origin, step, n)
    }

    /// `f_k(x) = k·f(kx)`: same samples, axis compressed by `k`.
    pub fn rescale(&self, k: f64) -> Result<Self> {
        if !(k > 0.0) || !k.is_finite() {
            return Err(Error::NonpositiveScale(k));
        }
        if k == 1.0 {
            return Ok(self.clone());
        }
        Ok(Self { origin: self.origin / k, step: self.step / k, values: self.values.iter().map(|v| v * k).collect() })
    }

    /// `∫|f − g|`, evaluated on a grid aligned with one of the inputs.
    ///
    /// The coarser input sets the grid unless the finer one is too narrow to
    /// be seen at that spacing.
    pub fn l1_distance(&self, other: &Self) -> Result<f64> {
        let (coarse, fine) = if self.step >= other.step { (self, other) } else { (other, self) };
        let narrow = fine.moments().std_dev() < 2.0 * coarse.step;
        let base = if narrow { fine } else { coarse };
        let lo = self.origin.min(other.origin);
        let hi = self.end().max(other.end());
        self.check_extension(lo, hi)?;
        other.check_extension(lo, hi)?;

        let h = base.step;
        let first = ((lo - base.origin) / h).floor() as i64;
        let last = ((hi - base.origin) / h).ceil() as i64;
        let n = (last - first + 1) as usize;
        if n > MAX_GRID_POINTS {
            return Err(Error::GridResolution { needed: n, limit: MAX_GRID_POINTS });
        }
        let eval_base = |idx: i64| -> f64 {
            if idx >= 0 && (idx as usize) < base.len() {
                base.values[idx as usize]
            } else {
                0.0
            }
        };
        let partner = if std::ptr::eq(base, self) { other } else { self };
        let diffs = exec::map_range(n, |i| {
            let idx = first + i as i64;
            let x = base.origin + h * idx as f64;
            (eval_base(idx) - partner.value_at(x)).abs()
        });
        Ok(h * diffs.iter().sum::<f64>())
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "# origin={} step={} n={}", format_real(self.origin), format_real(self.step), self.len())?;
        for (i, v) in self.values.iter().enumerate() {
            writeln!(out, "{},{}", format_real(self.coordinate(i)), format_real(*v))?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(input: R) -> Result<Self> {
        let mut lines = input.lines();
        let header = lines.next().ok_or_else(|| Error::Parse("empty distribution file".into()))??;
        let header =
            header.strip_prefix('#').ok_or_else(|| Error::Parse(format!("missing header line, got {header:?}")))?;
        let (mut origin, mut step, mut n) = (None, None, None);
        for field in header.split_whitespace() {
            let (key, value) =
                field.split_once('=').ok_or_else(|| Error::Parse(format!("bad header field {field:?}")))?;
            let bad = |_| Error::Parse(format!("bad header value {field:?}"));
            match key {
                "origin" => origin = Some(value.parse::<f64>().map_err(bad)?),
                "step" => step = Some(value.parse::<f64>().map_err(bad)?),
                "n" => n = Some(value.parse::<usize>().map_err(|_| Error::Parse(format!("bad n {value:?}")))?),
                _ => return Err(Error::Parse(format!("unknown header key {key:?}"))),
            }
        }
        let (origin, step, n) = match (origin, step, n) {
            (Some(o), Some(s), Some(n)) => (o, s, n),
            _ => return Err(Error::Parse("header needs origin, step and n".into())),
        };
        let mut values = Vec::with_capacity(n);
        for line in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let (_, density) =
                line.split_once(',').ok_or_else(|| Error::Parse(format!("expected two columns, got {line:?}")))?;
            values.push(density.trim().parse::<f64>().map_err(|_| Error::Parse(format!("bad density {density:?}")))?);
        }
        if values.len() != n {
            return Err(Error::Parse(format!("header says n={n}, found {} rows", values.len())));
        }
        Self::new(origin, step, values)
    }
}

/// Shortest round-trip text for `x`, switching to exponent notation outside
/// `[1e-4, 1e15)` so tails do not print as long runs of zeros.
pub fn format_real(x: f64) -> String {
    let m = x.abs();
    if m == 0.0 || !m.is_finite() || (1e-4..1e15).contains(&m) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// Keys cubic convolution weights (`a = −1/2`) for samples `i−1 … i+2` at
/// fractional offset `u` past sample `i`.
fn keys_weights(u: f64) -> [f64; 4] {
    let u2 = u * u;
    let u3 = u2 * u;
    [-0.5 * u3 + u2 - 0.5 * u, 1.5 * u3 - 2.5 * u2 + 1.0, -1.5 * u3 + 2.0 * u2 + 0.5 * u, 0.5 * u3 - 0.5 * u2]
}

/// Convolution `(f∗g)(x) = ∫ f(y) g(x − y) dy` on a common grid.
///
/// Inputs with different steps are first brought to the finer step by linear
/// interpolation of the coarser one.
pub fn convolve(f: &GriddedDistribution, g: &GriddedDistribution) -> Result<GriddedDistribution> {
    let ratio = f.step / g.step;
    if (ratio - 1.0).abs() <= STEP_MATCH {
        return convolve_aligned(f, g);
    }
    if ratio > 1.0 {
        convolve_aligned(&f.refine(g.step)?, g)
    } else {
        convolve_aligned(f, &g.refine(f.step)?)
    }
}

/// Convolution of two distributions that already share a step.
pub fn convolve_aligned(f: &GriddedDistribution, g: &GriddedDistribution) -> Result<GriddedDistribution> {
    if ((f.step / g.step) - 1.0).abs() > STEP_MATCH {
        return Err(Error::MismatchedGrids { left: f.step, right: g.step });
    }
    let h = f.step;
    let n = f.len() + g.len() - 1;
    if n > MAX_GRID_POINTS {
        return Err(Error::GridResolution { needed: n, limit: MAX_GRID_POINTS });
    }
    let raw = if n <= DIRECT_CONVOLUTION_LIMIT {
        exec::map_range(n, |k| {
            let lo = k.saturating_sub(g.len() - 1);
            let hi = k.min(f.len() - 1);
            (lo..=hi).map(|j| f.values[j] * g.values[k - j]).sum::<f64>()
        })
    } else {
        fft_convolve(&f.values, &g.values)
    };
    // FFT round-off can leave tiny negative values.
    let values = raw.into_iter().map(|v| (v * h).max(0.0)).collect();
    Ok(GriddedDistribution { origin: f.origin + g.origin, step: h, values })
}

/// The four initial densities of object and probe.
///
/// `big_g` is the density of `−P`, i.e. `G(x) = |Φ(−x)|²`, so that every
/// output law is a plain convolution.
#[derive(Debug, Clone, PartialEq)]
pub struct InputDistributions {
    /// `f(q) = |ψ(q)|²`
    pub f: GriddedDistribution,
    /// `F(Q) = |Ψ(Q)|²`
    pub big_f: GriddedDistribution,
    /// `g(p) = |φ(p)|²`
    pub g: GriddedDistribution,
    /// `G(−P) = |Φ(P)|²`
    pub big_g: GriddedDistribution,
}

impl InputDistributions {
    /// Gaussian densities matching the given second-moment summaries.
    pub fn gaussian(
        obj: &ObjectStateSpec,
        probe: &ProbeStateSpec,
        grid_points: usize,
        span_sigmas: f64,
    ) -> Result<Self> {
        let mk = |m, s| GriddedDistribution::gaussian(m, s, grid_points, span_sigmas);
        Ok(Self {
            f: mk(obj.mean_q, obj.sigma_q)?,
            big_f: mk(probe.mean_big_q, probe.sigma_big_q)?,
            g: mk(obj.mean_p, obj.sigma_p)?,
            big_g: mk(-probe.mean_big_p, probe.sigma_big_p)?,
        })
    }
}

/// Output densities `F'` (of `Q'`) and `g'` (of `p'`).
#[derive(Debug, Clone, PartialEq)]
pub struct OutputDistributions {
    pub big_f_out: GriddedDistribution,
    pub g_out: GriddedDistribution,
}

/// Ideal interaction: `F' = f∗F`, `g' = g∗G`.
pub fn ideal_output_distributions(inputs: &InputDistributions) -> Result<OutputDistributions> {
    Ok(OutputDistributions {
        big_f_out: convolve(&inputs.f, &inputs.big_f)?,
        g_out: convolve(&inputs.g, &inputs.big_g)?,
    })
}

/// General interaction.
///
/// For `ab ≠ 0`: `F' = (f_{1/b'} ∗ F_{1/a'})_{1/Δ}` and
/// `g' = (g_{1/a} ∗ G_{1/b})_Δ`.
///
/// For `a = 0` the probe reads `Q' = bq` and `p' = −b'P`, giving
/// `F' = f_{1/b}`, `g' = G_{1/b'}`; for `b = 0`, `Q' = aQ` and `p' = a'p`, giving
/// `F' = F_{1/a}`, `g' = g_{1/a'}`. In the standard forms (`b = 1, c = −1`
/// and `a = d = 1`) these are exactly `f, G` and `F, g`.
pub fn general_output_distributions(
    params: &InteractionParams,
    inputs: &InputDistributions,
) -> Result<OutputDistributions> {
    let InputDistributions { f, big_f, g, big_g } = inputs;
    let (a, b, delta) = (params.a(), params.b(), params.delta());
    let (a_p, b_p) = (params.a_p(), params.b_p());
    if a == 0.0 {
        return Ok(OutputDistributions { big_f_out: f.rescale(1.0 / b)?, g_out: big_g.rescale(1.0 / b_p)? });
    }
    if b == 0.0 {
        return Ok(OutputDistributions { big_f_out: big_f.rescale(1.0 / a)?, g_out: g.rescale(1.0 / a_p)? });
    }
    let big_f_out = convolve(&f.rescale(1.0 / b_p)?, &big_f.rescale(1.0 / a_p)?)?.rescale(1.0 / delta)?;
    let g_out = convolve(&g.rescale(1.0 / a)?, &big_g.rescale(1.0 / b)?)?.rescale(delta)?;
    Ok(OutputDistributions { big_f_out, g_out })
}

/// Gain-referred `(ε*, η*)` read off the probe densities:
/// `ε* = (a/b)σ(F)`, `η* = (b/a)σ(G)`.
pub fn distribution_error_disturbance(
    params: &InteractionParams,
    big_f: &GriddedDistribution,
    big_g: &GriddedDistribution,
) -> GainReferred {
    gain_referred_from_widths(params, big_f.moments().std_dev(), big_g.moments().std_dev())
}

/// One row of a limit study: the gain being sent to zero and the L1
/// distances of `F'` and `g'` from their limiting shapes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LimitPoint {
    pub gain: f64,
    pub l1_position: f64,
    pub l1_momentum: f64,
}

fn check_limit_sequence(seq: &[f64]) -> Result<()> {
    let in_range = seq.iter().all(|&x| x > 0.0 && x <= 1.0);
    let decreasing = seq.windows(2).all(|w| w[1] < w[0]);
    if seq.is_empty() || !in_range || !decreasing {
        return Err(Error::InvalidDistribution(
            "limit sequence must be non-empty, strictly decreasing and within (0, 1]".into(),
        ));
    }
    Ok(())
}

/// `a → 0` at fixed `b` and `Δ`.
///
/// `F'` tends to `f_{1/b}` (a copy of `f` for `b = 1`) and `g'` to `G_{1/b'}`
/// (`G_Δ` for `b = 1`): the object momentum is replaced by the probe's.
pub fn delta_limit_study(
    b: f64,
    delta: f64,
    a_sequence: &[f64],
    inputs: &InputDistributions,
) -> Result<Vec<LimitPoint>> {
    check_limit_sequence(a_sequence)?;
    let rows = exec::map_slice(a_sequence, |&a| -> Result<LimitPoint> {
        let params = InteractionParams::from_gains(a, b, delta)?;
        let out = general_output_distributions(&params, inputs)?;
        let f_limit = inputs.f.rescale(1.0 / b)?;
        let g_limit = inputs.big_g.rescale(delta / b)?;
        Ok(LimitPoint {
            gain: a,
            l1_position: out.big_f_out.l1_distance(&f_limit)?,
            l1_momentum: out.g_out.l1_distance(&g_limit)?,
        })
    });
    rows.into_iter().collect()
}

/// `b → 0` at fixed `a` and `Δ`, the dual of [`delta_limit_study`].
///
/// `F'` tends to `F_{1/a}` and `g'` to `g_{1/a'}`.
pub fn dual_delta_limit_study(
    a: f64,
    delta: f64,
    b_sequence: &[f64],
    inputs: &InputDistributions,
) -> Result<Vec<LimitPoint>> {
    check_limit_sequence(b_sequence)?;
    let rows = exec::map_slice(b_sequence, |&b| -> Result<LimitPoint> {
        let params = InteractionParams::from_gains(a, b, delta)?;
        let out = general_output_distributions(&params, inputs)?;
        let f_limit = inputs.big_f.rescale(1.0 / a)?;
        let g_limit = inputs.g.rescale(delta / a)?;
        Ok(LimitPoint {
            gain: b,
            l1_position: out.big_f_out.l1_distance(&f_limit)?,
            l1_momentum: out.g_out.l1_distance(&g_limit)?,
        })
    });
    rows.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Hbar;
    use proptest::prelude::*;

    fn unit_gaussian() -> GriddedDistribution {
        GriddedDistribution::gaussian(0.0, 1.0, 4096, 8.0).unwrap()
    }

    #[test]
    fn validation() {
        assert!(GriddedDistribution::new(0.0, 0.1, vec![0.625; 16]).is_ok());
        assert!(GriddedDistribution::new(0.0, 0.1, vec![0.625; 15]).is_err());
        assert!(GriddedDistribution::new(0.0, 0.1, vec![0.6; 16]).is_err());
        let mut v = vec![0.625; 16];
        v[3] = 1.25;
        v[4] = -0.0001;
        assert!(GriddedDistribution::new(0.0, 0.1, v).is_err());
        assert!(GriddedDistribution::new(0.0, -0.1, vec![-0.625; 16]).is_err());
    }

    #[test]
    fn gaussian_moments() {
        let m = unit_gaussian().moments();
        assert!(m.mean.abs() < 1e-9);
        assert!((m.variance - 1.0).abs() < 1e-6);
    }

    #[test]
    fn uniform_moments_and_rescale() {
        let u = GriddedDistribution::uniform(0.0, 1.0, 4096).unwrap();
        let m = u.moments();
        assert!((m.mean - 0.5).abs() < 1e-12);
        assert!((m.variance - 1.0 / 12.0).abs() < 1e-6);

        let u2 = u.rescale(2.0).unwrap();
        assert!(u2.values().iter().all(|&v| v == 2.0));
        assert!(u2.origin() > 0.0 && u2.end() < 0.5);
        assert!((u2.moments().mean - 0.25).abs() < 1e-12);
        assert!((u2.mass() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rescale_gaussian_and_identity() {
        let g = unit_gaussian();
        let g2 = g.rescale(2.0).unwrap();
        assert!((g2.moments().std_dev() - 0.5).abs() < 1e-7);
        assert_eq!(g.rescale(1.0).unwrap(), g);
        assert!(matches!(g.rescale(0.0), Err(Error::NonpositiveScale(_))));
        assert!(matches!(g.rescale(-1.0), Err(Error::NonpositiveScale(_))));
    }

    #[test]
    fn convolution_of_gaussians() {
        let g = unit_gaussian();
        let gg = convolve(&g, &g).unwrap();
        assert!((gg.mass() - 1.0).abs() < 1e-6);
        assert!((gg.moments().variance - 2.0).abs() < 1e-6);
        let expected = GriddedDistribution::gaussian(0.0, 2f64.sqrt(), 4096, 10.0).unwrap();
        assert!(gg.l1_distance(&expected).unwrap() < 1e-6);
    }

    #[test]
    fn near_delta_reproduces_input() {
        let f = GriddedDistribution::gaussian(0.3, 1.0, 2048, 10.0).unwrap();
        let sharp = GriddedDistribution::gaussian(0.0, 1e-3, 256, 10.0).unwrap();
        let out = convolve(&f, &sharp).unwrap();
        assert!(out.l1_distance(&f).unwrap() < 1e-3);
    }

    #[test]
    fn direct_and_fft_paths_agree() {
        let f = GriddedDistribution::gaussian(0.0, 1.0, 2000, 10.0).unwrap();
        let g = GriddedDistribution::sample(-10.0, f.step(), 2000, |x| {
            0.5 * ((-(x + 1.0).powi(2) / 0.5).exp() + (-(x - 1.0).powi(2) / 0.5).exp())
                / (0.5 * std::f64::consts::PI).sqrt()
        })
        .unwrap();
        let direct = convolve(&f, &g).unwrap();
        assert!(direct.len() <= DIRECT_CONVOLUTION_LIMIT);
        let fft = GriddedDistribution {
            origin: f.origin + g.origin,
            step: f.step,
            values: fft_convolve(&f.values, &g.values).iter().map(|v| (v * f.step).max(0.0)).collect(),
        };
        for (x, y) in direct.values().iter().zip(fft.values()) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn mismatched_steps() {
        let f = GriddedDistribution::gaussian(0.0, 1.0, 512, 10.0).unwrap();
        let g = GriddedDistribution::gaussian(0.0, 0.5, 512, 10.0).unwrap();
        assert!(matches!(convolve_aligned(&f, &g), Err(Error::MismatchedGrids { .. })));
        let fg = convolve(&f, &g).unwrap();
        assert!((fg.moments().variance - 1.25).abs() < 1e-5);
    }

    #[test]
    fn resample_refuses_to_drop_mass() {
        let u = GriddedDistribution::uniform(0.0, 1.0, 64).unwrap();
        assert!(matches!(u.resample(-1.0, 0.01, 300), Err(Error::Extrapolation { .. })));
        let g = unit_gaussian();
        assert!(g.resample(-20.0, 0.01, 4001).is_ok());
    }

    #[test]
    fn grid_resolution_limit() {
        let f = GriddedDistribution::gaussian(0.0, 1.0, 4096, 10.0).unwrap();
        let tiny = f.rescale(1e6).unwrap();
        assert!(matches!(convolve(&f, &tiny), Err(Error::GridResolution { .. })));
    }

    fn inputs(sq: f64, sbq: f64) -> InputDistributions {
        let obj = ObjectStateSpec::minimum_uncertainty(0.0, 0.0, sq, Hbar::NATURAL).unwrap();
        let probe = ProbeStateSpec::minimum_uncertainty(sbq, Hbar::NATURAL).unwrap();
        InputDistributions::gaussian(&obj, &probe, 4096, 10.0).unwrap()
    }

    #[test]
    fn ideal_outputs() {
        let sharp = inputs(1.0, 1e-2);
        let out = ideal_output_distributions(&sharp).unwrap();
        assert!(out.big_f_out.l1_distance(&sharp.f).unwrap() < 1e-3);
        // σ(P) = 50 destroys g.
        assert!(out.g_out.moments().std_dev() > 50.0 * sharp.g.moments().std_dev());

        let i = inputs(1.0, 0.7);
        let out = ideal_output_distributions(&i).unwrap();
        let lhs = out.big_f_out.moments().variance;
        let rhs = i.f.moments().variance + i.big_f.moments().variance;
        assert!((lhs / rhs - 1.0).abs() < 1e-4);
    }

    #[test]
    fn general_reduces_to_ideal_bitwise() {
        let i = inputs(1.3, 0.6);
        let ideal = ideal_output_distributions(&i).unwrap();
        let general = general_output_distributions(&InteractionParams::ideal(), &i).unwrap();
        assert_eq!(ideal, general);
    }

    #[test]
    fn exact_cases() {
        let i = inputs(1.3, 0.6);
        let type_a = InteractionParams::new(0.0, 1.0, -1.0, 0.4).unwrap();
        let out = general_output_distributions(&type_a, &i).unwrap();
        assert_eq!(out.big_f_out, i.f);
        assert_eq!(out.g_out, i.big_g);

        let type_b = InteractionParams::new(1.0, 0.0, 0.7, 1.0).unwrap();
        let out = general_output_distributions(&type_b, &i).unwrap();
        assert_eq!(out.big_f_out, i.big_f);
        assert_eq!(out.g_out, i.g);

        // Outside the standard form the copies are rescaled by the gains.
        let scaled_a = InteractionParams::new(0.0, 2.0, -1.0, 0.0).unwrap();
        let out = general_output_distributions(&scaled_a, &i).unwrap();
        assert!((out.big_f_out.moments().std_dev() - 2.0 * 1.3).abs() < 1e-6);
    }

    #[test]
    fn general_variance_laws() {
        let i = inputs(0.8, 1.1);
        let p = InteractionParams::new(0.7, 1.4, -0.3, 1.1).unwrap();
        let out = general_output_distributions(&p, &i).unwrap();
        let (a, b, a_p) = (p.a(), p.b(), p.a_p());
        let sf = i.f.moments().variance;
        let s_big_f = i.big_f.moments().variance;
        let sg = i.g.moments().variance;
        let s_big_g = i.big_g.moments().variance;
        let expect_f = b * b * (sf + (a / b).powi(2) * s_big_f);
        let expect_g = a_p * a_p * (sg + (b / a).powi(2) * s_big_g);
        assert!((out.big_f_out.moments().variance / expect_f - 1.0).abs() < 1e-4);
        assert!((out.g_out.moments().variance / expect_g - 1.0).abs() < 1e-4);
        assert!((out.big_f_out.mass() - 1.0).abs() < 1e-6);
        assert!((out.g_out.mass() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn distribution_gain_referred() {
        let i = inputs(1.0, 1.0);
        let p = InteractionParams::from_gains(0.5, 0.5, 1.0).unwrap();
        let g = distribution_error_disturbance(&p, &i.big_f, &i.big_g);
        assert!((g.epsilon_star - 1.0).abs() < 1e-6);
        assert!(g.product() >= 0.5 * (1.0 - 1e-6));

        let type_a = InteractionParams::new(0.0, 1.0, -1.0, 1.0).unwrap();
        assert_eq!(distribution_error_disturbance(&type_a, &i.big_f, &i.big_g).pair(), (0.0, f64::INFINITY));
    }

    #[test]
    fn limit_study_converges_and_dualizes() {
        let i = inputs(1.0, 0.5);
        let seq = [0.2, 0.1, 0.05, 0.025];
        let rows = delta_limit_study(1.0, 1.0, &seq, &i).unwrap();
        for w in rows.windows(2) {
            assert!(w[1].l1_position < w[0].l1_position);
            assert!(w[1].l1_momentum < w[0].l1_momentum);
        }

        // Position ↔ momentum with a ↔ b swaps the two columns.
        let swapped =
            InputDistributions { f: i.g.clone(), big_f: i.big_g.clone(), g: i.f.clone(), big_g: i.big_f.clone() };
        let dual = dual_delta_limit_study(1.0, 1.0, &seq, &swapped).unwrap();
        for (r, d) in rows.iter().zip(&dual) {
            assert_eq!(r.l1_position, d.l1_momentum);
            assert_eq!(r.l1_momentum, d.l1_position);
        }

        assert!(delta_limit_study(1.0, 1.0, &[0.1, 0.2], &i).is_err());
        assert!(delta_limit_study(1.0, 1.0, &[1.5], &i).is_err());
    }

    #[test]
    fn real_formatting_round_trips() {
        for x in [0.0, -0.0, 1.0, 0.1, 1e-4, 9.99e-5, 123456.789, 1e15, -3.5e-300, f64::MIN_POSITIVE] {
            let s = format_real(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
        assert_eq!(format_real(2.5e-7), "2.5e-7");
        assert_eq!(format_real(0.25), "0.25");
    }

    #[test]
    fn csv_header_format() {
        let d = GriddedDistribution::gaussian(0.0, 1.0, 16, 8.0).unwrap();
        let mut buf = Vec::new();
        d.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let first = text.lines().next().unwrap();
        assert_eq!(first, format!("# origin=-8 step={} n=16", 16.0 / 15.0));
        assert!(text.lines().nth(1).unwrap().starts_with("-8,5.0522710835"));
        assert_eq!(text.lines().count(), 17);
        assert!(GriddedDistribution::read_csv("# origin=0 step=1\n".as_bytes()).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn csv_round_trip(mean in -5.0..5.0f64, sigma in 0.1..4.0f64, n in 16usize..200) {
            let d = GriddedDistribution::gaussian(mean, sigma, n, 9.0).unwrap();
            let mut buf = Vec::new();
            d.write_csv(&mut buf).unwrap();
            let back = GriddedDistribution::read_csv(buf.as_slice()).unwrap();
            prop_assert_eq!(back, d);
        }

        #[test]
        fn variance_additivity_of_mixtures(
            w in 0.1..0.9f64, m1 in -2.0..2.0f64, m2 in -2.0..2.0f64,
            s1 in 0.3..1.5f64, s2 in 0.3..1.5f64, s3 in 0.3..1.5f64,
        ) {
            let step = 0.01;
            let mix = |x: f64| {
                let n = |m: f64, s: f64| (-(x - m).powi(2) / (2.0 * s * s)).exp() / (s * (2.0 * std::f64::consts::PI).sqrt());
                w * n(m1, s1) + (1.0 - w) * n(m2, s2)
            };
            let f = GriddedDistribution::sample(-15.0, step, 3001, mix).unwrap();
            let g = GriddedDistribution::sample(0.5 - 10.0 * s3, step, (20.0 * s3 / step) as usize, |x| {
                (-(x - 0.5).powi(2) / (2.0 * s3 * s3)).exp() / (s3 * (2.0 * std::f64::consts::PI).sqrt())
            })
            .unwrap();
            let fg = convolve(&f, &g).unwrap();
            let expected = f.moments().variance + g.moments().variance;
            prop_assert!((fg.moments().variance / expected - 1.0).abs() < 1e-4);
            prop_assert!((fg.mass() - 1.0).abs() < 1e-6);
        }

        #[test]
        fn rescale_preserves_mass_and_scales_variance(k in 0.05..20.0f64) {
            let g = GriddedDistribution::gaussian(0.4, 1.2, 256, 10.0).unwrap();
            let gk = g.rescale(k).unwrap();
            prop_assert!((gk.mass() - g.mass()).abs() < 1e-12);
            let m = g.moments();
            let mk = gk.moments();
            prop_assert!((mk.mean - m.mean / k).abs() < 1e-12 * (1.0 + m.mean.abs() / k));
            prop_assert!((mk.variance / (m.variance / (k * k)) - 1.0).abs() < 1e-12);
        }
    }
}
