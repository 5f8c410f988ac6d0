//! Spectral geometry of compact Solv 3-manifolds.
//!
//! The crate works mode by mode: an Anosov monodromy determines a lattice in
//! the fiber, the dual lattice indexes Fourier blocks, and each block reduces
//! to a one-dimensional operator on the line.
//!
//! - [`solvlat`]: monodromy eigendata, lattices, dual lattices, mode orbits,
//!   covers and spin twists.
//! - [`ode1d`]: finite-difference Hermitian eigensolvers, a shooting oracle
//!   and positivity certificates for exponential potentials.
//! - [`scalar`]: the Laplacian on functions.
//! - [`coexact`]: the curl operator on coexact 1-forms and the `λ₁* = 1`
//!   certificate.
//! - [`dirac`]: the Dirac operator per mode and harmonic-spinor counts.
//! - [`report`]: the end-to-end spectral criterion report.

pub mod coexact;
pub mod dirac;
pub mod error;
pub mod ode1d;
pub mod report;
pub mod scalar;
pub mod solvlat;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// Version tag written into every JSON document produced by this crate.
pub const SCHEMA_VERSION: &str = "1";
