//! Second-moment error and disturbance.
//!
//! Two definitions are provided. The legacy one borrows the ideal-measurement
//! operators `E = Q' − q`, `D = p' − p`. The gain-referred one divides the
//! output by the interaction gain first: `E* = Q'/b − q`, `D* = p'/a' − p`.

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::exec;
use crate::interaction::InteractionParams;
use crate::Hbar;

/// Slack allowed on the state uncertainty relation `σ(x)σ(p) ≥ ħ/2`.
const STATE_SLACK: f64 = 1e-12;
/// Slack allowed when reporting a bound as satisfied.
pub const BOUND_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ObjectStateSpec {
    pub mean_q: f64,
    pub mean_p: f64,
    pub sigma_q: f64,
    pub sigma_p: f64,
}

impl ObjectStateSpec {
    pub fn new(mean_q: f64, mean_p: f64, sigma_q: f64, sigma_p: f64, hbar: Hbar) -> Result<Self> {
        check_pair("object", sigma_q, sigma_p, hbar)?;
        check_finite("object mean", &[mean_q, mean_p])?;
        Ok(Self { mean_q, mean_p, sigma_q, sigma_p })
    }

    /// A minimum-uncertainty state, `σ(p) = ħ / 2σ(q)`.
    pub fn minimum_uncertainty(mean_q: f64, mean_p: f64, sigma_q: f64, hbar: Hbar) -> Result<Self> {
        Self::new(mean_q, mean_p, sigma_q, hbar.half() / sigma_q, hbar)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProbeStateSpec {
    #[serde(rename = "mean_Q")]
    pub mean_big_q: f64,
    #[serde(rename = "mean_P")]
    pub mean_big_p: f64,
    #[serde(rename = "sigma_Q")]
    pub sigma_big_q: f64,
    #[serde(rename = "sigma_P")]
    pub sigma_big_p: f64,
}

impl ProbeStateSpec {
    /// A zero-mean probe, `⟨Q⟩ = ⟨P⟩ = 0`.
    pub fn new(sigma_big_q: f64, sigma_big_p: f64, hbar: Hbar) -> Result<Self> {
        Self::displaced(0.0, 0.0, sigma_big_q, sigma_big_p, hbar)
    }

    pub fn minimum_uncertainty(sigma_big_q: f64, hbar: Hbar) -> Result<Self> {
        Self::new(sigma_big_q, hbar.half() / sigma_big_q, hbar)
    }

    /// A probe with nonzero means; only the distribution and oracle engines
    /// see the displacement.
    pub fn displaced(mean_big_q: f64, mean_big_p: f64, sigma_big_q: f64, sigma_big_p: f64, hbar: Hbar) -> Result<Self> {
        check_pair("probe", sigma_big_q, sigma_big_p, hbar)?;
        check_finite("probe mean", &[mean_big_q, mean_big_p])?;
        Ok(Self { mean_big_q, mean_big_p, sigma_big_q, sigma_big_p })
    }
}

fn check_pair(what: &str, sx: f64, sp: f64, hbar: Hbar) -> Result<()> {
    if !(sx > 0.0 && sp > 0.0 && sx.is_finite() && sp.is_finite()) {
        return Err(Error::InvalidState(format!(
            "{what} standard deviations must be positive and finite, got ({sx}, {sp})"
        )));
    }
    if sx * sp < hbar.half() - STATE_SLACK {
        return Err(Error::InvalidState(format!("{what} violates σσ ≥ ħ/2: {} < {}", sx * sp, hbar.half())));
    }
    Ok(())
}

fn check_finite(what: &str, xs: &[f64]) -> Result<()> {
    if xs.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidState(format!("{what} must be finite")))
    }
}

/// Legacy error `ε` and disturbance `η`.
///
/// Means are removed before taking second moments, so only the standard
/// deviations of the two states enter:
/// `ε² = a²σ²(Q) + (b−1)²σ²(q)`, `η² = (a'−1)²σ²(p) + b'²σ²(P)`.
pub fn legacy_error_disturbance(
    params: &InteractionParams,
    obj: &ObjectStateSpec,
    probe: &ProbeStateSpec,
) -> (f64, f64) {
    let (a, b) = (params.a(), params.b());
    let (a_p, b_p) = (params.a_p(), params.b_p());
    let eps2 = (a * probe.sigma_big_q).powi(2) + ((b - 1.0) * obj.sigma_q).powi(2);
    let eta2 = ((a_p - 1.0) * obj.sigma_p).powi(2) + (b_p * probe.sigma_big_p).powi(2);
    (eps2.sqrt(), eta2.sqrt())
}

/// Gain-referred error and disturbance, `ε* = (a/b)σ(Q)`, `η* = (b/a)σ(P)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainReferred {
    pub epsilon_star: f64,
    pub eta_star: f64,
    /// Set for `a = 0` or `b = 0`, where one factor is infinite and the
    /// product is taken as its `a → 0` (or `b → 0`) limit.
    pub limit_resolved: bool,
    product: f64,
}

impl GainReferred {
    /// `ε*η*`, equal to `σ(Q)σ(P)` for every interaction.
    pub fn product(&self) -> f64 {
        self.product
    }

    pub fn pair(&self) -> (f64, f64) {
        (self.epsilon_star, self.eta_star)
    }
}

pub fn gain_referred_error_disturbance(params: &InteractionParams, probe: &ProbeStateSpec) -> GainReferred {
    gain_referred_from_widths(params, probe.sigma_big_q, probe.sigma_big_p)
}

/// Same as [`gain_referred_error_disturbance`] but from bare probe widths
/// `σ(Q)` and `σ(P)` (or `σ(F)`, `σ(G)` for sampled densities).
pub fn gain_referred_from_widths(params: &InteractionParams, sigma_q: f64, sigma_p: f64) -> GainReferred {
    let (a, b) = (params.a(), params.b());
    let limit = sigma_q * sigma_p;
    if a == 0.0 {
        GainReferred { epsilon_star: 0.0, eta_star: f64::INFINITY, limit_resolved: true, product: limit }
    } else if b == 0.0 {
        GainReferred { epsilon_star: f64::INFINITY, eta_star: 0.0, limit_resolved: true, product: limit }
    } else {
        let epsilon_star = (a / b) * sigma_q;
        let eta_star = (b / a) * sigma_p;
        GainReferred { epsilon_star, eta_star, limit_resolved: false, product: epsilon_star * eta_star }
    }
}

/// Normalized trajectory point `(ε̃, η̃)` for minimum-uncertainty object and
/// probe with balance `w = σ(Q)/σ(q) = σ(p)/σ(P)`:
/// `ε̃² = a²w² + (b−1)²`, `η̃² = (a'−1)² + b'²/w²`.
pub fn normalized_moments(params: &InteractionParams, w: f64) -> Result<(f64, f64)> {
    if !(w > 0.0) || !w.is_finite() {
        return Err(Error::NonpositiveBalance(w));
    }
    let (a, b) = (params.a(), params.b());
    let (a_p, b_p) = (params.a_p(), params.b_p());
    let eps2 = (a * w).powi(2) + (b - 1.0).powi(2);
    let eta2 = (a_p - 1.0).powi(2) + (b_p / w).powi(2);
    Ok((eps2.sqrt(), eta2.sqrt()))
}

/// Lower bound of `ε̃² + η̃²` over all `w`: `(a' + b − 1)² + 1`.
pub fn circle_floor(params: &InteractionParams) -> f64 {
    (params.a_p() + params.b() - 1.0).powi(2) + 1.0
}

/// What the bounds are evaluated on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundInputs {
    /// Already-normalized `(ε̃, η̃)`.
    Normalized { epsilon_tilde: f64, eta_tilde: f64 },
    /// Raw `ε`, `η` together with the object widths.
    Raw { epsilon: f64, eta: f64, sigma_q: f64, sigma_p: f64, hbar: Hbar },
}

/// Left-hand sides of the three bounds, each to be compared against 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundCheck {
    pub hur_lhs: f64,
    pub our_lhs: f64,
    pub circle_lhs: f64,
    pub hur_satisfied: bool,
    pub our_satisfied: bool,
    pub circle_satisfied: bool,
}

/// Evaluates HUR (`ε̃η̃ ≥ 1`), OUR (`ε̃η̃ + ε̃ + η̃ ≥ 1`) and the circle bound
/// (`ε̃² + η̃² ≥ 1`).
///
/// For raw inputs HUR and OUR are taken in their unnormalized forms
/// `εη ≥ ħ/2` and `εη + εσ(p) + σ(q)η ≥ ħ/2`, divided by `ħ/2`; these agree
/// with the normalized forms whenever the object has minimum uncertainty.
pub fn evaluate_bounds(inputs: BoundInputs) -> BoundCheck {
    let (hur_lhs, our_lhs, circle_lhs) = match inputs {
        BoundInputs::Normalized { epsilon_tilde: e, eta_tilde: n } => (e * n, e * n + e + n, e * e + n * n),
        BoundInputs::Raw { epsilon, eta, sigma_q, sigma_p, hbar } => {
            let half = hbar.half();
            let e = epsilon / sigma_q;
            let n = eta / sigma_p;
            (epsilon * eta / half, (epsilon * eta + epsilon * sigma_p + sigma_q * eta) / half, e * e + n * n)
        }
    };
    let ok = |x: f64| x >= 1.0 - BOUND_SLACK;
    BoundCheck {
        hur_lhs,
        our_lhs,
        circle_lhs,
        hur_satisfied: ok(hur_lhs),
        our_satisfied: ok(our_lhs),
        circle_satisfied: ok(circle_lhs),
    }
}

/// Smallest disturbance OUR admits for an error-free (`ε = 0`) measurement:
/// `η ≥ (ħ/2)/σ(q)`.
pub fn our_minimum_disturbance(sigma_q: f64, hbar: Hbar) -> f64 {
    hbar.half() / sigma_q
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrajectoryPoint {
    pub w: f64,
    pub epsilon_tilde: f64,
    pub eta_tilde: f64,
    pub bounds: BoundCheck,
}

/// Evaluates [`normalized_moments`] and the bounds at every `w`, in order.
pub fn trajectory(params: &InteractionParams, w_grid: &[f64]) -> Result<Vec<TrajectoryPoint>> {
    if w_grid.is_empty() || w_grid.windows(2).any(|p| !(p[1] > p[0])) {
        return Err(Error::InvalidBalanceGrid);
    }
    if let Some(&w) = w_grid.iter().find(|w| !(**w > 0.0)) {
        return Err(Error::NonpositiveBalance(w));
    }
    exec::map_slice(w_grid, |&w| {
        let (epsilon_tilde, eta_tilde) = normalized_moments(params, w)?;
        let bounds = evaluate_bounds(BoundInputs::Normalized { epsilon_tilde, eta_tilde });
        Ok(TrajectoryPoint { w, epsilon_tilde, eta_tilde, bounds })
    })
    .into_iter()
    .collect()
}

/// `n` logarithmically spaced points from `min` to `max` inclusive.
///
/// Points are `10^(x₀ + i·Δx)`, so decade boundaries come out exact.
pub fn log_spaced(min: f64, max: f64, n: usize) -> Result<Vec<f64>> {
    if !(min > 0.0) || !(max > min) || !max.is_finite() || n < 2 {
        return Err(Error::InvalidBalanceGrid);
    }
    let (lo, hi) = (min.log10(), max.log10());
    let step = (hi - lo) / (n - 1) as f64;
    let mut grid: Vec<f64> = (0..n).map(|i| 10f64.powf(lo + step * i as f64)).collect();
    grid[0] = min;
    grid[n - 1] = max;
    Ok(grid)
}

/// 200 log-spaced balance values in `[1e-2, 1e2]`.
pub fn default_w_grid() -> Vec<f64> {
    log_spaced(1e-2, 1e2, 200).expect("static grid")
}

/// Everything known about one (interaction, object, probe) configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UncertaintyReport {
    pub epsilon: f64,
    pub eta: f64,
    #[serde(serialize_with = "extended_real")]
    pub epsilon_star: f64,
    #[serde(serialize_with = "extended_real")]
    pub eta_star: f64,
    pub epsilon_tilde: f64,
    pub eta_tilde: f64,
    pub w: f64,
    pub hur_lhs: f64,
    pub our_lhs: f64,
    pub circle_lhs: f64,
    pub hur_satisfied: bool,
    pub our_satisfied: bool,
    pub circle_satisfied: bool,
    /// `ε*η*`, finite even when one factor is infinite.
    pub gain_product: f64,
    pub gain_hur_satisfied: bool,
    pub limit_resolved: bool,
}

pub fn report(
    params: &InteractionParams,
    obj: &ObjectStateSpec,
    probe: &ProbeStateSpec,
    hbar: Hbar,
) -> UncertaintyReport {
    let (epsilon, eta) = legacy_error_disturbance(params, obj, probe);
    let gain = gain_referred_error_disturbance(params, probe);
    let bounds = evaluate_bounds(BoundInputs::Raw { epsilon, eta, sigma_q: obj.sigma_q, sigma_p: obj.sigma_p, hbar });
    UncertaintyReport {
        epsilon,
        eta,
        epsilon_star: gain.epsilon_star,
        eta_star: gain.eta_star,
        epsilon_tilde: epsilon / obj.sigma_q,
        eta_tilde: eta / obj.sigma_p,
        w: probe.sigma_big_q / obj.sigma_q,
        hur_lhs: bounds.hur_lhs,
        our_lhs: bounds.our_lhs,
        circle_lhs: bounds.circle_lhs,
        hur_satisfied: bounds.hur_satisfied,
        our_satisfied: bounds.our_satisfied,
        circle_satisfied: bounds.circle_satisfied,
        gain_product: gain.product(),
        gain_hur_satisfied: gain.product() >= hbar.half() * (1.0 - BOUND_SLACK),
        limit_resolved: gain.limit_resolved,
    }
}

/// JSON has no infinity; write it as the string `"inf"`.
pub fn extended_real<S: Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if x.is_infinite() {
        s.serialize_str(if *x > 0.0 { "inf" } else { "-inf" })
    } else {
        s.serialize_f64(*x)
    }
}
