//! Radial amplitude equations for fully localised planar patterns.
//!
//! The crate is organised bottom-up:
//!
//! * [`bessel`] — integer-order Bessel functions `J_n`, their derivatives and the
//!   order-shifting operators `D_m = d/dr + m/r` acting on radial profiles.
//! * [`identities`] — convolutional Bessel sums and two independent oracles
//!   (plane-wave quadrature and an explicit wavevector enumeration).
//! * [`amplitude`] — the quadratic–cubic Ginzburg–Landau equation on the half-line:
//!   closed-form solutions, Maxwell points, a Newton BVP solver and time stepping.
//! * [`pattern`] — synthesis of stripes, hexagons, rhomboids and 12-fold
//!   quasipatterns, both as Cartesian cosine sums and as Fourier–Bessel modes.
//! * [`she`] — spectral Swift–Hohenberg residuals, scaling studies, resonant
//!   projections and a pseudo-spectral time stepper.
//! * [`rd`] — amplitude coefficients of two-component reaction–diffusion systems
//!   with a Jordan (double-zero) linear structure.
//! * [`io`] — CSV, JSON and field-binary serialisation shared with the CLI.

// `!(x > 0.0)` is used on purpose so that NaN fails every domain check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod amplitude;
pub mod bessel;
pub mod error;
pub mod identities;
pub mod io;
mod linalg;
pub mod pattern;
pub mod rd;
pub mod she;

pub use error::{Error, Result};
pub use num_complex::Complex64;
