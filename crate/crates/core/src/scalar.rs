//! Scalar abstractions shared by the dense linear algebra.
//!
//! Exact identity checks run over [`BigRational`]; eigen-decompositions and
//! anything involving square roots run over `f32`/`f64`.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Float, FromPrimitive, Num, Signed, ToPrimitive};

/// A field element usable in elimination, determinants and rank updates.
///
/// Implemented for `f32`, `f64` and `BigRational`. Arithmetic on the rational
/// backing is exact.
pub trait Scalar: Num + Signed + Clone + PartialOrd + Debug + Send + Sync {
    /// Whether arithmetic is exact (no rounding).
    const EXACT: bool;

    fn from_i64(value: i64) -> Self;

    fn as_f64(&self) -> f64;

    /// Largest-magnitude entry wins pivot selection; exact backings only need
    /// a nonzero pivot but using magnitude keeps one code path.
    fn magnitude(&self) -> f64 {
        self.as_f64().abs()
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_i64(value: i64) -> Self {
        value as f64
    }

    fn as_f64(&self) -> f64 {
        *self
    }
}

impl Scalar for f32 {
    const EXACT: bool = false;

    fn from_i64(value: i64) -> Self {
        value as f32
    }

    fn as_f64(&self) -> f64 {
        f64::from(*self)
    }
}

impl Scalar for BigRational {
    const EXACT: bool = true;

    fn from_i64(value: i64) -> Self {
        BigRational::from_integer(BigInt::from(value))
    }

    fn as_f64(&self) -> f64 {
        rational_to_f64(self)
    }

    fn magnitude(&self) -> f64 {
        // Pivoting on exact data only needs "nonzero"; avoid the float
        // conversion of huge numerators.
        if num_traits::Zero::is_zero(self) {
            0.0
        } else {
            1.0
        }
    }
}

/// Real scalars that support square roots and the transcendental functions.
pub trait RealScalar: Scalar + Float + FromPrimitive {}

impl RealScalar for f32 {}
impl RealScalar for f64 {}

/// Rational from a numerator/denominator pair.
pub fn ratio(numer: i64, denom: i64) -> BigRational {
    BigRational::new(BigInt::from(numer), BigInt::from(denom))
}

/// Converts a rational to the nearest representable `f64`, staying accurate
/// when numerator and denominator individually overflow `f64`.
pub fn rational_to_f64(value: &BigRational) -> f64 {
    if let Some(x) = value.to_f64() {
        if x.is_finite() && (x != 0.0 || num_traits::Zero::is_zero(value)) {
            return x;
        }
    }
    let ln = ln_abs_rational(value);
    let sign = if value.is_negative() { -1.0 } else { 1.0 };
    sign * ln.exp()
}

/// Natural log of |value|; `-inf` for zero.
pub fn ln_abs_rational(value: &BigRational) -> f64 {
    if num_traits::Zero::is_zero(value) {
        return f64::NEG_INFINITY;
    }
    ln_bigint(&value.numer().abs()) - ln_bigint(&value.denom().abs())
}

/// Natural log of a positive big integer, accurate to f64 precision for any size.
pub fn ln_bigint(value: &BigInt) -> f64 {
    let bits = value.bits();
    if bits <= 1000 {
        return value.to_f64().map_or(f64::NAN, f64::ln);
    }
    let shift = bits - 64;
    let top: BigInt = value >> shift;
    top.to_f64().map_or(f64::NAN, f64::ln) + shift as f64 * std::f64::consts::LN_2
}

/// Generic helper: the real constant `x` in scalar type `T`.
pub fn real<T: RealScalar>(x: f64) -> T {
    T::from_f64(x).expect("finite constant representable in scalar type")
}
