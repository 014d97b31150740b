//! Exact-arithmetic curve counting.
//!
//! Everything here runs over arbitrary-precision rationals with no
//! rounding: truncated multigraded series with an exponential/logarithm
//! pair, tangency-sequence combinatorics, the Caporaso-Harris recursion
//! for plane Severi degrees with a Kontsevich-recursion cross-check, a
//! convolution engine for relative-invariant tables with S-matrix
//! inversion, and the rational-elliptic-surface pipeline that reproduces
//! the Bryan-Leung product formula.

pub mod contact;
pub mod elliptic;
pub mod error;
pub mod rational;
pub mod selftest;
pub mod series;
pub mod severi;
pub mod sumformula;

pub use error::{Error, Result};
pub use rational::Rational;
pub use series::{GradedMonomial, TruncatedSeries};
