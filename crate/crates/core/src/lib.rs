//! Numerical laboratory for compact-spectrum solutions of nonlinear wave
//! equations.
//!
//! - [`support`]: support edges, semicontinuous envelopes and partial
//!   convolution of gridded distributions.
//! - [`nonlinearity`]: algebraic nonlinearities, growth exponents and
//!   polynomial certificates.
//! - [`bootstrap`]: exact-rational exponent arithmetic of the regularity
//!   bootstrap.
//! - [`radial`]: radial Schrödinger and Dirac eigenproblems.
//! - [`soliton`]: assembly of multifrequency Dirac solitary waves and
//!   inversion of the nonlinearity.
//! - [`evolve`]: 1D NLS/NLKG evolution, time spectra, and the nonlinear
//!   Dirac residual.

// NaN must fail `!(x > 0.0)`-style guards; `is_multiple_of` postdates the
// MSRV; parallel-array loops index several slices at once.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::manual_is_multiple_of, clippy::needless_range_loop)]

pub mod bootstrap;
pub mod evolve;
pub mod nonlinearity;
pub mod numeric;
pub mod radial;
pub mod soliton;
pub mod support;

/// Crate version, embedded in reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub use num_complex::Complex64;
pub use num_rational::BigRational;

pub use bootstrap::{BootstrapState, BootstrapStatus, BootstrapTrace};
pub use nonlinearity::{AlgebraicNonlinearity, Certificate, KappaClass, Polynomial};
pub use radial::{RadialEigenpair, RadialGrid, RadialPotential, SchrodingerEigenpair};
pub use soliton::{MultiFrequencyWave, NonlinearityTable, SpinorFrame};
pub use evolve::{Alpha, PeriodicGrid, Trajectory1D};
pub use support::{EdgeFunction, Grid2, GriddedDistribution};
