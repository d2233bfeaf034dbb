//! Normal approximation of Haar-distributed orthogonal matrices.
//!
//! The crate evaluates the exact density of an upper-left block of a Haar
//! orthogonal matrix, splits its ratio against a Gaussian density into a
//! deterministic gamma-ratio factor and a spectral factor, estimates the
//! resulting variation distance by Monte Carlo, and builds the Gram–Schmidt
//! coupling between a Gaussian matrix and a Haar matrix.
//!
//! Core numeric kernels are generic over [`Real`]; the aliases below fix the
//! scalar to `f64` for the simulation layers.

pub mod error;
pub mod numerics;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::{Extended, Real};
