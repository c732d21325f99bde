//! Numerical laboratory for multiple ergodic averages along cubes.
//!
//! The crate is split by role:
//!
//! * [`dynsys`] generates exact orbits of rotations, Bernoulli/Markov shifts
//!   and finite permutations, and samples observables along them.
//! * [`cubeavg`] evaluates the two- and three-parameter cube averages, with a
//!   naive reference path and an FFT path, plus the twisted average.
//! * [`expsum`] holds the Wiener–Wintner exponential-sum machinery:
//!   fixed-frequency averages, certified sup-norms over the frequency and the
//!   three-sequence inequality checker.
//! * [`oracle`] provides exact rational reference values on finite
//!   permutation systems, product-of-integral limits and return-set scans.

pub mod accum;
pub mod cubeavg;
pub mod dynsys;
mod error;
pub mod expsum;
pub mod fft;
pub mod oracle;
pub mod sampling;

pub use error::{Error, Result};

/// Exact rational numbers used for measures, probabilities and oracle values.
pub type Rational = num_rational::Ratio<i128>;

pub use num_complex::Complex64;
