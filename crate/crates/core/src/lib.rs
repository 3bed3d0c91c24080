//! Sums of plane-wave Slater determinants as approximants of anti-symmetric
//! Barron functions under the standard Gaussian envelope.
//!
//! The crate is organised bottom-up:
//!
//! * [`planewave`] evaluates `a_w`, its overlaps and norms, and the generic
//!   anti-symmetrizer;
//! * [`activation`] holds ReLU, softplus, the sine integral and the
//!   high-pass/low-pass split of ReLU;
//! * [`barron`] turns discrete Barron measures into a complex measure over
//!   plane waves and samples it;
//! * [`bounds`] certifies the low-rank and determinant inequalities;
//! * [`experiments`] fits Slater sums and estimates Barron norms of
//!   harmonic-oscillator targets.

pub mod activation;
pub mod barron;
pub mod bounds;
pub mod construct;
pub mod error;
pub mod experiments;
pub mod linalg;
pub mod mp;
pub mod permutations;
pub mod planewave;
pub mod quadrature;
pub mod rng;

pub use error::{Error, Result};
pub use num_complex::Complex64;
