//! Envelope constants for the bad regions, the `L`/`U` correction factors,
//! the complex-power and Gaussian-box sandwiches, and the assembled
//! return-probability interval.
//!
//! Everything here runs on `f64`; products are accumulated as sums of logs.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::Serialize;

use crate::covariance::{box_constants, det_m_closed};
use crate::design::{check_vk, derive_params, ln_binomial, pair_count, DesignParams};
use crate::error::{param, Error, Result};

fn ln_binom(v: u32, k: u32) -> f64 {
    ln_binomial(v.into(), k.into())
}

fn check_k2(v: u32, k: u32) -> Result<()> {
    check_vk(v, k)?;
    if k < 2 {
        return param(format!("bounds need k >= 2, got k={k}"));
    }
    Ok(())
}

/// Constants of the region estimates at a fixed `δ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnvelopeConstants {
    pub delta: f64,
    /// Upper limit on `δ` for the region-B estimate.
    pub delta_max: f64,
    /// Bound on `|Φ_X|` over region B.
    pub bound_b: f64,
    /// Bound on `|Φ_X|` over region C at this `δ`.
    pub bound_c: f64,
    /// `1 / C(v, k)`.
    pub inv_binom: f64,
}

impl EnvelopeConstants {
    /// `exp(-C(v,k)⁻¹ (11/768) t δ²)`.
    pub fn decay(&self, t: f64) -> f64 {
        (-self.inv_binom * (11.0 / 768.0) * t * self.delta * self.delta).exp()
    }
}

pub fn envelope_constants(v: u32, k: u32, delta: f64) -> Result<EnvelopeConstants> {
    check_k2(v, k)?;
    if !delta.is_finite() || delta <= 0.0 {
        return param(format!("delta must be positive, got {delta}"));
    }
    let ln_b = ln_binom(v, k);
    let inv_binom = (-ln_b).exp();
    let h = TAU / (k as f64 - 1.0);
    let ln_delta_max = -2.0 * (k as f64).ln() - 2.0 * ln_b + 4.0 * h.ln() - (6.0 * 96.0f64 * 96.0).ln();
    Ok(EnvelopeConstants {
        delta,
        delta_max: ln_delta_max.exp(),
        bound_b: 1.0 - inv_binom * h * h / 96.0,
        bound_c: 1.0 - inv_binom * (11.0 / 48.0) * (delta / 4.0).powi(2),
        inv_binom,
    })
}

pub fn decay(v: u32, k: u32, t: f64, delta: f64) -> Result<f64> {
    Ok(envelope_constants(v, k, delta)?.decay(t))
}

/// The lower and upper correction factors, with their logs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LuBounds {
    pub lower: f64,
    pub upper: f64,
    pub ln_lower: f64,
    pub ln_upper: f64,
}

/// `ln(1 - e^{-x})` for `x >= 0`.
fn ln_one_minus_exp_neg(x: f64) -> f64 {
    (-(-x).exp_m1()).ln()
}

/// `L(v,k,t,δ)` and `U(v,k,t,δ)` given the box constants `d1`, `d2`.
pub fn l_u_bounds(v: u32, k: u32, t: f64, delta: f64, d1: f64, d2: f64) -> Result<LuBounds> {
    check_k2(v, k)?;
    if t < 2.0 || !t.is_finite() {
        return param(format!("t must be at least 2, got {t}"));
    }
    if delta.is_nan() || delta < 0.0 {
        return param(format!("delta must be nonnegative, got {delta}"));
    }
    let d = pair_count(v) as f64;
    let dd = d * delta;
    let dd4 = dd.powi(4);
    let dd6 = dd.powi(6);
    if dd4 / 3.0 >= 1.0 {
        return Err(Error::OutOfDomain(format!(
            "(dδ)⁴ = {dd4:e} >= 3 makes 1 - (dδ)⁴/3 nonpositive"
        )));
    }
    let half_dm1 = (d - 1.0) / 2.0;
    let ln_lower = -0.5 * (t * t * dd6).ln_1p()
        + t * (-dd4 / 3.0).ln_1p()
        + half_dm1 * ln_one_minus_exp_neg(t * (d1 * delta).powi(2) / 2.0);
    let ln_upper = 0.5 * t * (dd6 / 4.0).ln_1p()
        + t * (dd4 / 3.0).ln_1p()
        + half_dm1 * ln_one_minus_exp_neg(t * (2.0 * d2 * delta).powi(2));
    Ok(LuBounds {
        lower: ln_lower.exp(),
        upper: ln_upper.exp(),
        ln_lower,
        ln_upper,
    })
}

/// `δ = t^{-5/12}`.
pub fn default_delta(t: f64) -> f64 {
    t.powf(-5.0 / 12.0)
}

/// `(lower, upper)` with `lower <= Re(z^t) <= upper`.
///
/// Needs `Re z > 0` and `α = 1 - C(t,2) β² > 0` where `β = Im z / Re z`.
pub fn real_power_bounds(z: Complex64, t: u64) -> Result<(f64, f64)> {
    if z.re.is_nan() || z.re <= 0.0 {
        return Err(Error::HypothesisFailed(format!(
            "Re(z) must be positive, got {}",
            z.re
        )));
    }
    let tf = t as f64;
    let beta = z.im / z.re;
    let alpha = 1.0 - tf * (tf - 1.0) / 2.0 * beta * beta;
    if alpha.is_nan() || alpha <= 0.0 {
        return Err(Error::HypothesisFailed(format!(
            "alpha(z, t) = {alpha} is not positive"
        )));
    }
    let ln_upper = tf * z.re.ln() + 0.5 * tf * (beta * beta).ln_1p();
    let ln_lower = ln_upper - 0.5 * ((tf / alpha).powi(2) * beta * beta).ln_1p();
    Ok((ln_lower.exp(), ln_upper.exp()))
}

/// `(lower, ∫_{-ρ}^{ρ} e^{-x²/2} dx, upper)`.
pub fn gaussian_box_bounds(rho: f64) -> Result<(f64, f64, f64)> {
    if rho.is_nan() || rho < 0.0 {
        return param(format!("rho must be nonnegative, got {rho}"));
    }
    let lower = (TAU * -(-rho * rho / 2.0).exp_m1()).sqrt();
    let upper = (TAU * -(-rho * rho).exp_m1()).sqrt();
    let integral = TAU.sqrt() * libm::erf(rho / 2f64.sqrt());
    Ok((lower, integral, upper))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundCase {
    /// `λ` is not an integer: the probability is exactly zero.
    Zero,
    /// `λ` is an integer but `r` is not: only the decay term survives.
    DecayOnly,
    /// Both integral: two-sided bound around the Gaussian term.
    Sandwich,
}

/// Interval containing the return probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundInterval {
    pub lower: f64,
    pub upper: f64,
    pub case: BoundCase,
    pub delta: f64,
    /// Gaussian main term `(k-1)^{v-1} / sqrt((2πt)^{d-1} det M)`; sandwich only.
    pub main_term: Option<f64>,
    pub decay: Option<f64>,
    pub lu: Option<LuBounds>,
}

/// `ln` of `(k-1)^{v-1} / sqrt((2πt)^{d-1} det M)`.
pub fn ln_main_term(v: u32, k: u32, t: f64) -> Result<f64> {
    let det = det_m_closed(v, k)?;
    let d = pair_count(v) as f64;
    Ok((v as f64 - 1.0) * (k as f64 - 1.0).ln() - 0.5 * ((d - 1.0) * (TAU * t).ln() + det.ln))
}

pub fn return_prob_interval(v: u32, k: u32, t: u64, delta: f64) -> Result<BoundInterval> {
    check_k2(v, k)?;
    let derived = derive_params(&DesignParams::new(v, k, t)?);
    if !derived.lambda_is_integer() {
        return Ok(BoundInterval {
            lower: 0.0,
            upper: 0.0,
            case: BoundCase::Zero,
            delta,
            main_term: None,
            decay: None,
            lu: None,
        });
    }
    let env = envelope_constants(v, k, delta)?;
    if delta >= env.delta_max {
        return Err(Error::HypothesisFailed(format!(
            "delta = {delta:e} is not below delta_max = {:e}",
            env.delta_max
        )));
    }
    let tf = t as f64;
    let decay = env.decay(tf);
    if !derived.r_is_integer() {
        return Ok(BoundInterval {
            lower: 0.0,
            upper: decay,
            case: BoundCase::DecayOnly,
            delta,
            main_term: None,
            decay: Some(decay),
            lu: None,
        });
    }
    let d = pair_count(v) as f64;
    let t_cap = 2.0 * (d * delta).powi(-3);
    if t < 2 || tf >= t_cap {
        return Err(Error::HypothesisFailed(format!(
            "need 2 <= t < 2(dδ)^-3 = {t_cap:e}, got t = {t}"
        )));
    }
    let sq = box_constants(v, k)?;
    let lu = l_u_bounds(v, k, tf, delta, sq.d1, sq.d2)?;
    let ln_a = ln_main_term(v, k, tf)?;
    let main = ln_a.exp();
    let lower = ((ln_a + lu.ln_lower).exp() - decay).max(0.0);
    let upper = (ln_a + lu.ln_upper).exp() + decay;
    Ok(BoundInterval {
        lower,
        upper,
        case: BoundCase::Sandwich,
        delta,
        main_term: Some(main),
        decay: Some(decay),
        lu: Some(lu),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn envelope_53() {
        let e = envelope_constants(5, 3, 1e-2).unwrap();
        assert!((e.delta_max - 1.957e-6).abs() < 1e-9);
        assert!((e.bound_b - (1.0 - PI * PI / 960.0)).abs() < 1e-15);
        assert!((e.decay(1e6) - 0.8666).abs() < 1e-4);
        assert!(e.bound_c <= 1.0 && e.bound_c > 0.0);
        let small = envelope_constants(5, 3, 1e-7).unwrap();
        assert!(small.bound_c >= small.bound_b);
    }

    #[test]
    fn lu_at_zero_delta() {
        let lu = l_u_bounds(5, 3, 100.0, 0.0, 0.1, 0.7).unwrap();
        assert_eq!((lu.lower, lu.upper), (0.0, 0.0));
    }

    #[test]
    fn lu_near_one_at_large_t() {
        let t = 1e18;
        let lu = l_u_bounds(5, 3, t, default_delta(t), 0.112365, 0.754153).unwrap();
        assert!((lu.lower - 1.0).abs() <= 0.01);
        assert!((lu.upper - 1.0).abs() <= 0.01);
        assert!(lu.lower <= lu.upper);
    }

    #[test]
    fn lu_out_of_domain() {
        assert!(matches!(
            l_u_bounds(5, 3, 10.0, 0.2, 0.1, 0.7),
            Err(Error::OutOfDomain(_))
        ));
    }

    #[test]
    fn real_power_examples() {
        let (lo, hi) = real_power_bounds(Complex64::new(0.9, 0.0), 7).unwrap();
        assert!((lo - 0.9f64.powi(7)).abs() < 1e-15 && (hi - lo).abs() < 1e-15);
        let z = Complex64::new(1.0, 0.01);
        let (lo, hi) = real_power_bounds(z, 5).unwrap();
        let re = z.powu(5).re;
        assert!(lo <= re && re <= hi);
        assert!(matches!(
            real_power_bounds(Complex64::new(1.0, 1.0), 2),
            Err(Error::HypothesisFailed(_))
        ));
        assert!(real_power_bounds(Complex64::new(-1.0, 0.0), 2).is_err());
    }

    #[test]
    fn gaussian_box() {
        assert_eq!(gaussian_box_bounds(0.0).unwrap(), (0.0, 0.0, 0.0));
        let (lo, mid, hi) = gaussian_box_bounds(1.0).unwrap();
        assert!((lo - 1.5723).abs() < 1e-4);
        assert!((mid - 1.71125).abs() < 1e-4);
        assert!((hi - 1.9929).abs() < 1e-4);
        let (lo, mid, hi) = gaussian_box_bounds(40.0).unwrap();
        for x in [lo, mid, hi] {
            assert!((x - TAU.sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn interval_cases() {
        let z = return_prob_interval(4, 2, 5, 1e-9).unwrap();
        assert_eq!(z.case, BoundCase::Zero);
        assert_eq!((z.lower, z.upper), (0.0, 0.0));

        let delta = 1e-7;
        let b = return_prob_interval(6, 3, 5, delta).unwrap();
        assert_eq!(b.case, BoundCase::DecayOnly);
        assert_eq!(b.upper, decay(6, 3, 5.0, delta).unwrap());

        assert!(matches!(
            return_prob_interval(5, 3, 10, 1e-2),
            Err(Error::HypothesisFailed(_))
        ));
        // t too small relative to delta is fine, t too large is not
        assert!(matches!(
            return_prob_interval(5, 3, 10_000_000_000, 1e-2),
            Err(Error::HypothesisFailed(_))
        ));
    }

    #[test]
    fn sandwich_is_ordered() {
        let t: u64 = 100_000_000_000_000;
        let s = return_prob_interval(5, 3, t, default_delta(t as f64)).unwrap();
        assert_eq!(s.case, BoundCase::Sandwich);
        assert!(0.0 <= s.lower && s.lower <= s.upper);
    }
}
