//! The constant `f(v,k)`, the asymptotic count `Ψ̂` and the asymptotic
//! return probability. Values are carried as natural logs throughout.

use std::f64::consts::{LN_10, TAU};

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::Serialize;

use crate::design::{check_exhaustive, check_vk, derive_params, ln_binomial, pair_count, DesignParams};
use crate::error::{param, Error, Result};

fn check_domain(v: u32, k: u32) -> Result<()> {
    check_vk(v, k)?;
    if k < 2 || v < k + 2 {
        return param(format!("f(v,k) needs k >= 2 and v - k >= 2, got v={v}, k={k}"));
    }
    Ok(())
}

/// `ln f(v, k)`.
pub fn ln_f_vk(v: u32, k: u32) -> Result<f64> {
    check_domain(v, k)?;
    let d = pair_count(v) as f64;
    let (vf, kf) = (f64::from(v), f64::from(k));
    Ok(2f64.ln()
        + (d - vf) * (((kf - 1.0) * (vf - kf - 1.0)).ln() - (vf - 3.0).ln())
        + (d - 1.0) * ((kf * (vf - kf)).ln() - (vf - 2.0).ln())
        - d * (vf * (vf - 1.0)).ln())
}

/// `(f(v,k), ln f(v,k))`; the value underflows to zero for large `v` but the
/// log stays accurate.
pub fn f_vk(v: u32, k: u32) -> Result<(f64, f64)> {
    let ln = ln_f_vk(v, k)?;
    Ok((ln.exp(), ln))
}

/// `f(v,k)` as an exact rational (for `v <= 12`).
pub fn f_vk_exact(v: u32, k: u32) -> Result<BigRational> {
    check_domain(v, k)?;
    check_exhaustive(v, k)?;
    let d = pair_count(v) as i32;
    let vv = v as i32;
    let (vi, ki) = (i64::from(v), i64::from(k));
    let r = |n: i64, m: i64| BigRational::new(BigInt::from(n), BigInt::from(m));
    Ok(r(2, 1)
        * r((ki - 1) * (vi - ki - 1), vi - 3).pow(d - vv)
        * r(ki * (vi - ki), vi - 2).pow(d - 1)
        * r(1, vi * (vi - 1)).pow(d))
}

/// `Ψ̂` in log form.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AsymptoticCount {
    pub ln_value: f64,
    pub log10_value: f64,
    /// First 12 significant decimal digits of `Ψ̂`.
    pub leading_digits: String,
    /// `Ψ̂` as `d.ddddddddddde±N`.
    pub scientific: String,
    pub admissible: bool,
}

impl AsymptoticCount {
    fn from_ln(ln_value: f64, admissible: bool) -> Self {
        let log10_value = ln_value / LN_10;
        let (mantissa, exponent) = split_log10(log10_value);
        let mant = format!("{mantissa:.11}");
        Self {
            ln_value,
            log10_value,
            leading_digits: mant.replace('.', ""),
            scientific: format!("{mant}e{exponent:+}"),
            admissible,
        }
    }
}

/// Splits `log10 x` into a mantissa in `[1, 10)` and an integer exponent,
/// rounding the mantissa at 12 significant digits.
fn split_log10(log10: f64) -> (f64, i64) {
    let mut exponent = log10.floor();
    let mut mantissa = 10f64.powf(log10 - exponent);
    if (mantissa * 1e11).round() >= 1e12 {
        mantissa /= 10.0;
        exponent += 1.0;
    }
    (mantissa, exponent as i64)
}

fn check_admissible(v: u32, k: u32, t: u64) -> Result<()> {
    check_domain(v, k)?;
    if !derive_params(&DesignParams::new(v, k, t)?).admissible || t == 0 {
        return Err(Error::InadmissibleT { v, k, t });
    }
    Ok(())
}

/// `ln` of `C(v,k)^t / sqrt((2πt)^{d-1} f(v,k))`.
pub fn ln_psi_asymptotic(v: u32, k: u32, t: u64) -> Result<f64> {
    check_admissible(v, k, t)?;
    let d = pair_count(v) as f64;
    let tf = t as f64;
    Ok(tf * ln_binomial(v.into(), k.into()) - 0.5 * ((d - 1.0) * (TAU * tf).ln() + ln_f_vk(v, k)?))
}

pub fn psi_asymptotic(v: u32, k: u32, t: u64) -> Result<AsymptoticCount> {
    Ok(AsymptoticCount::from_ln(ln_psi_asymptotic(v, k, t)?, true))
}

/// `ln` of `(k-1)^{v-1} / sqrt((2πt)^{d-1} det M)`, with
/// `ln det M = ln f + 2(v-1) ln(k-1)`.
pub fn ln_return_prob_asymptotic(v: u32, k: u32, t: u64) -> Result<f64> {
    check_admissible(v, k, t)?;
    let d = pair_count(v) as f64;
    let lk = (f64::from(k) - 1.0).ln();
    let ln_det = ln_f_vk(v, k)? + 2.0 * (f64::from(v) - 1.0) * lk;
    Ok((f64::from(v) - 1.0) * lk - 0.5 * ((d - 1.0) * (TAU * t as f64).ln() + ln_det))
}

pub fn return_prob_asymptotic(v: u32, k: u32, t: u64) -> Result<f64> {
    ln_return_prob_asymptotic(v, k, t).map(f64::exp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::covariance::{det_m_closed, det_m_closed_exact};
    use crate::scalar::ratio;

    #[test]
    fn f_examples() {
        assert_eq!(f_vk_exact(4, 2).unwrap(), ratio(1, 46656));
        let (f, _) = f_vk(4, 2).unwrap();
        assert!((f * 46656.0 - 1.0).abs() < 1e-12);
        let (a, _) = f_vk(6, 2).unwrap();
        let (b, _) = f_vk(6, 4).unwrap();
        assert!((a / b - 1.0).abs() < 1e-12);
        assert_eq!(f_vk_exact(6, 2).unwrap(), f_vk_exact(6, 4).unwrap());
        assert!(f_vk(5, 4).is_err());
        assert!(f_vk(5, 1).is_err());
    }

    #[test]
    fn f_links_to_det() {
        for (v, k) in [(5u32, 3u32), (7, 3), (8, 4)] {
            let scale = BigRational::from_integer(BigInt::from(k - 1).pow(2 * (v - 1)));
            assert_eq!(
                f_vk_exact(v, k).unwrap() * scale,
                det_m_closed_exact(v, k).unwrap()
            );
            let (f, _) = f_vk(v, k).unwrap();
            let det = det_m_closed(v, k).unwrap().value;
            let lhs = f * f64::from(k - 1).powi(2 * (v as i32 - 1));
            assert!((lhs / det - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn psi_hat_inadmissible() {
        assert_eq!(
            psi_asymptotic(5, 3, 7).unwrap_err(),
            Error::InadmissibleT { v: 5, k: 3, t: 7 }
        );
    }

    #[test]
    fn return_prob_consistency() {
        let lp = ln_return_prob_asymptotic(5, 3, 10).unwrap();
        let lpsi = ln_psi_asymptotic(5, 3, 10).unwrap();
        assert!((lp - (lpsi - 10.0 * 10f64.ln())).abs() < 1e-12);
        let mut prev = f64::INFINITY;
        for t in (10..200).step_by(10) {
            let p = return_prob_asymptotic(5, 3, t).unwrap();
            assert!(p < prev);
            prev = p;
        }
    }

    #[test]
    fn leading_digits_format() {
        let a = AsymptoticCount::from_ln(720f64.ln(), true);
        assert_eq!(a.leading_digits, "720000000000");
        assert_eq!(a.scientific, "7.20000000000e+2");
        let a = AsymptoticCount::from_ln(0.0, true);
        assert_eq!(a.scientific, "1.00000000000e+0");
    }
}
