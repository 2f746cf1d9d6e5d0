//! Exact verification engine for the canonical Cartan connection of
//! quaternionic contact structures.
//!
//! Modules, bottom up:
//! - [`number`]: Gaussian rationals.
//! - [`tensor`]: indexed tensors, `g`, `π`, the map `j`, `sp(n)` tests.
//! - [`exterior`]: canonical graded-commutative forms with symbolic coefficients.
//! - [`lie`]: the matrix model of `sp(n+1,1)`, Killing form, dual frames, `G₁`.
//! - [`structure`]: flat and curved structure equations and `d² = 0` certificates.
//! - [`cochain`]: curvature cochains, Kostant codifferential, homogeneity.
//! - [`bianchi`]: starred forms and the Bianchi combinations of the curved equations.
//! - [`chart`]: the quaternionic Heisenberg group in coordinates.

pub mod number;
pub mod bianchi;
pub mod chart;
pub mod cochain;
pub mod exterior;
pub mod lie;
pub mod matrix;
pub mod random;
pub mod structure;
pub mod tensor;

pub use number::{rat, GaussRational, Rational};
