//! Exact and asymptotic enumeration of BIBD incidence matrices.
//!
//! Counting, characteristic-function tooling for the associated lattice walk,
//! covariance determinants, explicit return-probability bounds and a
//! Monte Carlo cross-check.

pub mod asymptotics;
pub mod bounds;
pub mod charfn;
pub mod cli;
pub mod covariance;
pub mod design;
pub mod error;
pub mod exact_count;
pub mod json;
pub mod linalg;
pub mod mc_walk;
pub mod scalar;
pub mod verify;

pub use error::{Error, Result};

/// Exact rational scalar used for identity checks.
pub type Rational = num_rational::BigRational;
pub type RationalMatrix = linalg::Matrix<Rational>;
pub type RealMatrix = linalg::Matrix<f64>;
pub type Complex = num_complex::Complex64;
