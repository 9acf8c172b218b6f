//! The generalized linear interaction `|q⟩|Q⟩ ↦ √Δ |dq + cQ⟩|aQ + bq⟩`.
//!
//! In the Heisenberg picture the positions transform as
//! `(Q', q') = [[a, b], [c, d]] (Q, q)` and the momenta as
//! `(p', P') = Δ⁻¹ [[a, −b], [−c, d]] (p, P)` with `Δ = ad − bc > 0`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::Matrix2;

/// Relative threshold below which `Δ` counts as zero.
pub const DEGENERACY_TOLERANCE: f64 = 1e-12;

/// Validated, canonical interaction coefficients.
///
/// Construction flips the signs of `a` and `b` into `a ≥ 0, b ≥ 0`. Flipping
/// `a` corresponds to negating `Q` and `q'`; flipping `b` to negating `q` and
/// `q'`. Neither flip changes `Δ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InteractionParams {
    a: f64,
    b: f64,
    c: f64,
    d: f64,
    delta: f64,
}

impl InteractionParams {
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        for (name, value) in [("a", a), ("b", b), ("c", c), ("d", d)] {
            if !value.is_finite() {
                return Err(Error::NonFiniteCoefficient { name, value });
            }
        }
        let delta = a * d - b * c;
        let scale = (a * d).abs().max((b * c).abs()).max(1.0);
        if delta.abs() <= DEGENERACY_TOLERANCE * scale {
            return Err(Error::DegenerateInteraction { delta });
        }
        if delta < 0.0 {
            return Err(Error::NegativeDeterminant { delta });
        }

        let (mut a, mut b, mut c, mut d) = (a, b, c, d);
        if a < 0.0 {
            // Q -> -Q, q' -> -q'
            a = -a;
            d = -d;
        }
        if b < 0.0 {
            // q -> -q, q' -> -q'
            b = -b;
            c = -c;
        }
        // Normalize signed zeros so that exact-zero class tests are clean.
        let a = a + 0.0;
        let b = b + 0.0;
        Ok(Self { a, b, c, d, delta })
    }

    /// The ideal (von Neumann) interaction `Q' = Q + q`, `p' = p − P`.
    pub fn ideal() -> Self {
        Self::new(1.0, 1.0, 0.0, 1.0).expect("ideal interaction is unitary")
    }

    pub fn identity() -> Self {
        Self::new(1.0, 0.0, 0.0, 1.0).expect("identity is unitary")
    }

    /// Some interaction with the given gains `a`, `b` and determinant `Δ`.
    ///
    /// Only `a`, `b` and `Δ` enter the error/disturbance figures and the
    /// output distributions, so the remaining coefficients are filled in with
    /// `c = 0` when `a ≠ 0` and with the swap-like `d = 0` otherwise.
    pub fn from_gains(a: f64, b: f64, delta: f64) -> Result<Self> {
        if !(delta > 0.0) {
            return Err(Error::NegativeDeterminant { delta });
        }
        if a != 0.0 {
            Self::new(a, b, 0.0, delta / a)
        } else if b != 0.0 {
            Self::new(0.0, b, -delta / b, 0.0)
        } else {
            Err(Error::DegenerateInteraction { delta: 0.0 })
        }
    }

    pub fn a(&self) -> f64 {
        self.a
    }
    pub fn b(&self) -> f64 {
        self.b
    }
    pub fn c(&self) -> f64 {
        self.c
    }
    pub fn d(&self) -> f64 {
        self.d
    }
    /// `Δ = ad − bc`.
    pub fn delta(&self) -> f64 {
        self.delta
    }
    /// `a' = a/Δ`, the gain from `p` to `p'`.
    pub fn a_p(&self) -> f64 {
        self.a / self.delta
    }
    /// `b' = b/Δ`.
    pub fn b_p(&self) -> f64 {
        self.b / self.delta
    }
    pub fn c_p(&self) -> f64 {
        self.c / self.delta
    }
    pub fn d_p(&self) -> f64 {
        self.d / self.delta
    }
    /// Unitary normalization `ω = √Δ` of the position-basis map.
    pub fn omega(&self) -> f64 {
        self.delta.sqrt()
    }

    pub fn form(&self) -> StandardForm {
        if self.a != 0.0 && self.b != 0.0 {
            StandardForm::TypeO
        } else if self.a == 0.0 {
            StandardForm::TypeA
        } else {
            StandardForm::TypeB
        }
    }

    /// Forward coordinate map on `(q, Q)`: `(q', Q') = M (q, Q)`.
    pub fn coordinate_map(&self) -> LinearMap {
        LinearMap::new([[self.d, self.c], [self.b, self.a]])
    }
}

/// Heisenberg-picture coefficient matrices.
///
/// The position matrix acts on `(Q, q)` giving `(Q', q')`; the momentum matrix
/// acts on `(p, P)` giving `(p', P')`.
pub fn heisenberg_matrices(params: &InteractionParams) -> (Matrix2, Matrix2) {
    let InteractionParams { a, b, c, d, delta } = *params;
    let position = [[a, b], [c, d]];
    let momentum = [[a / delta, -b / delta], [-c / delta, d / delta]];
    (position, momentum)
}

/// Residuals of `[Q', P'] = iħ`, `[q', p'] = iħ` and `[Q', p'] = 0`, in units
/// of `iħ`.
pub fn commutator_residuals(params: &InteractionParams) -> [f64; 3] {
    let (a, b, c, d) = (params.a, params.b, params.c, params.d);
    let (a_p, b_p, c_p, d_p) = (params.a_p(), params.b_p(), params.c_p(), params.d_p());
    [(a * d_p - b * c_p - 1.0).abs(), (d * a_p - c * b_p - 1.0).abs(), (b * a_p - a * b_p).abs()]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum StandardForm {
    /// `ab ≠ 0`; reduces to `Q' = Q + q`, `p' = p − P`.
    TypeO,
    /// `a = 0`; error-free, `Q' = q`, `p' = −P`.
    TypeA,
    /// `b = 0`; disturbance-free, `Q' = Q`, `p' = p`.
    TypeB,
}

impl std::fmt::Display for StandardForm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            StandardForm::TypeO => "TypeO",
            StandardForm::TypeA => "TypeA",
            StandardForm::TypeB => "TypeB",
        };
        f.write_str(s)
    }
}

/// Scale factors `(Λ, λ, μ)` applied as `Q → ΛQ`, `q → λq`, `q' → μ⁻¹q'`
/// (with the conjugate momenta scaled inversely).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScaleTriple {
    pub big_lambda: f64,
    pub lambda: f64,
    pub mu: f64,
}

impl ScaleTriple {
    /// `diag(1, μ) · M · diag(Λ, λ)` for a position matrix `M`.
    pub fn reduce_position(&self, m: &Matrix2) -> Matrix2 {
        [
            [self.big_lambda * m[0][0], self.lambda * m[0][1]],
            [self.mu * self.big_lambda * m[1][0], self.mu * self.lambda * m[1][1]],
        ]
    }

    /// `diag(μ⁻¹, 1) · M · diag(λ⁻¹, Λ⁻¹)` for a momentum matrix `M`.
    pub fn reduce_momentum(&self, m: &Matrix2) -> Matrix2 {
        [
            [m[0][0] / (self.mu * self.lambda), m[0][1] / (self.mu * self.big_lambda)],
            [m[1][0] / self.lambda, m[1][1] / self.big_lambda],
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StandardFormClass {
    pub tag: StandardForm,
    pub reduced_position_matrix: Matrix2,
    pub reduced_momentum_matrix: Matrix2,
    pub scale_triple: ScaleTriple,
}

pub fn classify(params: &InteractionParams) -> StandardFormClass {
    let InteractionParams { a, b, c, d, delta } = *params;
    let tag = params.form();
    let (scale_triple, reduced_position_matrix, reduced_momentum_matrix) = match tag {
        StandardForm::TypeO => {
            let (a_p, b_p) = (params.a_p(), params.b_p());
            (
                ScaleTriple { big_lambda: 1.0 / a, lambda: 1.0 / b, mu: a * b / delta },
                [[1.0, 1.0], [b_p * c, a_p * d]],
                [[1.0, -1.0], [-b_p * c, a_p * d]],
            )
        }
        // Δ = −bc > 0 forces c ≠ 0.
        StandardForm::TypeA => (
            ScaleTriple { big_lambda: -1.0 / c, lambda: 1.0 / b, mu: 1.0 },
            [[0.0, 1.0], [-1.0, d / b]],
            [[0.0, -1.0], [1.0, d / b]],
        ),
        // Δ = ad > 0 forces d ≠ 0.
        StandardForm::TypeB => (
            ScaleTriple { big_lambda: 1.0 / a, lambda: 1.0 / d, mu: 1.0 },
            [[1.0, 0.0], [c / a, 1.0]],
            [[1.0, 0.0], [-c / a, 1.0]],
        ),
    };
    // `x + 0.0` turns a `−0` entry (from `−b'c` at `c = 0`) into `0`.
    let tidy = |m: Matrix2| m.map(|row| row.map(|x| x + 0.0));
    StandardFormClass {
        tag,
        reduced_position_matrix: tidy(reduced_position_matrix),
        reduced_momentum_matrix: tidy(reduced_momentum_matrix),
        scale_triple,
    }
}

/// An invertible linear map of the plane with positive determinant.
///
/// Used by the oracle as the coordinate transform `(q, Q) ↦ (q', Q')`.
/// Unlike [`InteractionParams`] it carries no sign canonicalization, so it can
/// also represent inverses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearMap {
    m: Matrix2,
}

impl LinearMap {
    pub fn new(m: Matrix2) -> Self {
        Self { m }
    }

    pub fn matrix(&self) -> Matrix2 {
        self.m
    }

    pub fn determinant(&self) -> f64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    pub fn apply(&self, x: f64, y: f64) -> (f64, f64) {
        (self.m[0][0] * x + self.m[0][1] * y, self.m[1][0] * x + self.m[1][1] * y)
    }

    pub fn inverse(&self) -> Self {
        let det = self.determinant();
        let [[p, q], [r, s]] = self.m;
        Self::new([[s / det, -q / det], [-r / det, p / det]])
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &LinearMap) -> Self {
        let a = self.m;
        let b = other.m;
        let mut out = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        Self::new(out)
    }
}
