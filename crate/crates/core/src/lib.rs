//! Generalized linear measurement interactions between an object and a probe.
//!
//! The crate is organized around the four engines used to study error and
//! disturbance in continuous-variable measurement:
//!
//! * [`interaction`] holds the coefficient model `(a, b, c, d)`, its
//!   canonicalization and the three standard forms.
//! * [`moments`] computes second-moment error/disturbance figures under the
//!   legacy and gain-referred definitions and evaluates the HUR, OUR and
//!   circle bounds.
//! * [`distribution`] transforms sampled probability densities: rescaling,
//!   convolution and the output-distribution laws of a general interaction.
//! * [`oracle`] is a brute-force check of all of the above: it pushes a
//!   sampled two-particle wavefunction through the coordinate map and reads
//!   the marginals back out.
//!
//! [`verify`] bundles the invariant suites that the `qmeas verify` command runs.
//!
//! Inner loops (trajectory sweeps, oracle rows and columns, direct
//! convolutions) run on rayon when the `parallel` feature is enabled, which it
//! is by default. Results are identical with and without the feature.

// `!(x > 0.0)` is how NaN gets rejected along with the non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod distribution;
pub mod error;
pub mod exec;
pub mod fourier;
pub mod interaction;
pub mod moments;
pub mod oracle;
pub mod verify;

pub use distribution::{GriddedDistribution, MomentSummary};
pub use error::{Error, Result};
pub use interaction::{InteractionParams, StandardForm, StandardFormClass};
pub use moments::{ObjectStateSpec, ProbeStateSpec, UncertaintyReport};
pub use oracle::{Axis, JointWavefunction, Wavefunction1D};

/// Reduced Planck constant used by every state and bound.
///
/// Natural units (`ħ = 1`) are the default; [`Hbar::SI`] is available for
/// callers that want SI magnitudes.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Hbar(pub f64);

impl Hbar {
    pub const NATURAL: Hbar = Hbar(1.0);
    pub const SI: Hbar = Hbar(1.054_571_8e-34);

    pub fn value(self) -> f64 {
        self.0
    }

    /// `ħ/2`, the floor of every uncertainty product.
    pub fn half(self) -> f64 {
        0.5 * self.0
    }
}

impl Default for Hbar {
    fn default() -> Self {
        Hbar::NATURAL
    }
}

/// A 2×2 real matrix stored row-major.
pub type Matrix2 = [[f64; 2]; 2];
