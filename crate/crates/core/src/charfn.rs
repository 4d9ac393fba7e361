//! Characteristic functions of the walk increments, the maximal set `Λ★`,
//! root-of-unity sums, and samplers for the regions `R_B` and `R_C`.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::design::{
    binomial_u64, check_exhaustive, derive_params, enumerate_columns, pair_count, pairs0, DesignParams,
};
use crate::error::{param, Error, Result};

/// Default circular tolerance for congruence tests.
pub const CIRCLE_TOL: f64 = 1e-9;

/// Reduces an angle to `[-π, π)`.
pub fn reduce_angle(x: f64) -> f64 {
    let r = x - TAU * ((x + PI) / TAU).floor();
    if r >= PI {
        r - TAU
    } else {
        r
    }
}

/// Distance from `x` to the nearest multiple of `modulus`.
pub fn circular_residue(x: f64, modulus: f64) -> f64 {
    let r = x.rem_euclid(modulus);
    r.min(modulus - r)
}

/// Angle vector of length `d`, entries reduced to `[-π, π)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseVector {
    angles: Vec<f64>,
}

impl PhaseVector {
    pub fn new(angles: Vec<f64>) -> Self {
        Self {
            angles: angles.into_iter().map(reduce_angle).collect(),
        }
    }

    pub fn zeros(d: usize) -> Self {
        Self { angles: vec![0.0; d] }
    }

    pub fn constant(d: usize, gamma: f64) -> Self {
        Self::new(vec![gamma; d])
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }

    /// Coordinatewise sum, reduced again.
    pub fn add(&self, other: &Self) -> Self {
        Self::new(
            self.angles
                .iter()
                .zip(&other.angles)
                .map(|(a, b)| a + b)
                .collect(),
        )
    }
}

/// Column pair supports for `(v, k)`, cached for repeated evaluation.
#[derive(Debug, Clone)]
pub struct CharFn {
    v: u32,
    k: u32,
    d: usize,
    c2: f64,
    supports: Vec<Vec<usize>>,
}

impl CharFn {
    pub fn new(v: u32, k: u32) -> Result<Self> {
        let cols = enumerate_columns(v, k)?;
        let d = pair_count(v);
        let c2 = (k as f64) * (k as f64 - 1.0) / ((v as f64) * (v as f64 - 1.0));
        Ok(Self {
            v,
            k,
            d,
            c2,
            supports: cols.iter().map(|c| c.pair_support()).collect(),
        })
    }

    pub fn v(&self) -> u32 {
        self.v
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn column_count(&self) -> usize {
        self.supports.len()
    }

    fn check_len(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.d {
            return Err(Error::Dimension(format!(
                "phase vector has length {}, need d = {}",
                theta.len(),
                self.d
            )));
        }
        Ok(())
    }

    /// `θ · Z(y)` for every column, unreduced.
    pub fn column_phases(&self, theta: &[f64]) -> Result<Vec<f64>> {
        self.check_len(theta)?;
        Ok(self
            .supports
            .iter()
            .map(|s| s.iter().map(|&r| theta[r]).sum())
            .collect())
    }

    pub fn phi_x(&self, theta: &[f64]) -> Result<Complex64> {
        let phases = self.column_phases(theta)?;
        let sum: Complex64 = phases.iter().map(|&p| Complex64::from_polar(1.0, p)).sum();
        Ok(sum / phases.len() as f64)
    }

    /// `(Φ_X(θ), Φ_Y(θ))`, with `Φ_Y = Φ_X · e^{-i C₂ (θ·1)}`.
    pub fn phi(&self, theta: &[f64]) -> Result<(Complex64, Complex64)> {
        let x = self.phi_x(theta)?;
        let total: f64 = theta.iter().sum();
        Ok((x, x * Complex64::from_polar(1.0, -self.c2 * total)))
    }

    pub fn phi_y(&self, theta: &[f64]) -> Result<Complex64> {
        self.phi(theta).map(|(_, y)| y)
    }

    /// Whether all `ℓ · Z(x)` agree modulo `2π` within `tol`.
    pub fn is_in_lambda_x(&self, ell: &[f64], tol: f64) -> Result<bool> {
        let phases = self.column_phases(ell)?;
        let first = phases[0];
        Ok(phases.iter().all(|&p| circular_residue(p - first, TAU) <= tol))
    }
}

/// Convenience wrapper around [`CharFn::phi`].
pub fn phi(v: u32, k: u32, theta: &PhaseVector) -> Result<(Complex64, Complex64)> {
    CharFn::new(v, k)?.phi(theta.angles())
}

pub fn is_in_lambda_x(v: u32, k: u32, ell: &PhaseVector, tol: f64) -> Result<bool> {
    if tol <= 0.0 {
        return param("tolerance must be positive");
    }
    CharFn::new(v, k)?.is_in_lambda_x(ell.angles(), tol)
}

/// `α^a`: 1 on pairs avoiding row `a` (1-based), else 0.
pub fn alpha_vec(v: u32, a: u32) -> Vec<f64> {
    let a0 = a as usize - 1;
    pairs0(v)
        .into_iter()
        .map(|(i, j)| if i == a0 || j == a0 { 0.0 } else { 1.0 })
        .collect()
}

/// `β^a = 1 - α^a`.
pub fn beta_vec(v: u32, a: u32) -> Vec<f64> {
    alpha_vec(v, a).into_iter().map(|x| 1.0 - x).collect()
}

/// One element of `Λ★`, stored by its coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaElement {
    pub gamma: f64,
    pub m1: u32,
    /// `(m_3, ..., m_v)`.
    pub m: Vec<u32>,
    pub psi: PhaseVector,
}

/// Integer coefficient of `m1 α¹ + Σ m_j β^j` on every pair, unreduced.
fn lambda_coeffs(v: u32, m1: u32, m: &[u32]) -> Vec<u32> {
    pairs0(v)
        .into_iter()
        .map(|(i, j)| {
            let mut c = if i == 0 { 0 } else { m1 };
            for (idx, &mj) in m.iter().enumerate() {
                let row = idx + 2;
                if i == row || j == row {
                    c += mj;
                }
            }
            c
        })
        .collect()
}

fn step(k: u32) -> f64 {
    TAU / (k as f64 - 1.0)
}

impl LambdaElement {
    pub fn new(v: u32, k: u32, m1: u32, m: Vec<u32>) -> Result<Self> {
        if k < 2 {
            return param("Λ★ needs k >= 2");
        }
        if m.len() != v as usize - 2 || m1 >= k - 1 || m.iter().any(|&x| x >= k - 1) {
            return param("coefficients must be m1, m_3..m_v each in [0, k-1)");
        }
        let h = step(k);
        let psi = PhaseVector::new(
            lambda_coeffs(v, m1, &m)
                .into_iter()
                .map(|c| h * f64::from(c % (k - 1)))
                .collect(),
        );
        Ok(Self {
            gamma: 0.0,
            m1,
            m,
            psi,
        })
    }

    /// The lattice vector `(2π/(k-1)) (m1 α¹ + Σ m_j β^j)` before any
    /// reduction. `Φ_Y` is not `2π`-periodic coordinatewise (the drift term
    /// carries the non-integer `C₂`), so the phase identity for `S` holds on
    /// this representative; `psi` agrees with it up to `2π` multiples.
    pub fn psi_box(&self, v: u32, k: u32) -> Vec<f64> {
        let h = step(k);
        lambda_coeffs(v, self.m1, &self.m)
            .into_iter()
            .map(|c| h * f64::from(c))
            .collect()
    }

    /// `S = m1 - Σ m_j`.
    pub fn s(&self) -> i64 {
        i64::from(self.m1) - self.m.iter().map(|&x| i64::from(x)).sum::<i64>()
    }

    /// Coefficientwise sum modulo `k - 1`.
    pub fn combine(&self, other: &Self, v: u32, k: u32) -> Result<Self> {
        let md = k - 1;
        Self::new(
            v,
            k,
            (self.m1 + other.m1) % md,
            self.m.iter().zip(&other.m).map(|(a, b)| (a + b) % md).collect(),
        )
    }
}

/// All `(k-1)^{v-1}` elements of `Λ★` in lexicographic coefficient order.
pub fn enumerate_lambda_star(v: u32, k: u32) -> Result<Vec<LambdaElement>> {
    check_exhaustive(v, k)?;
    if k < 2 {
        return param("Λ★ needs k >= 2");
    }
    let base = k - 1;
    let len = v as usize - 1;
    let total = (base as usize).pow(len as u32);
    let mut out = Vec::with_capacity(total);
    let mut digits = vec![0u32; len];
    for _ in 0..total {
        out.push(LambdaElement::new(v, k, digits[0], digits[1..].to_vec())?);
        for pos in (0..len).rev() {
            digits[pos] += 1;
            if digits[pos] < base {
                break;
            }
            digits[pos] = 0;
        }
    }
    Ok(out)
}

/// `(S, e^{i 2π k S / v})`; equals `Φ_Y` at [`LambdaElement::psi_box`].
pub fn lambda_phase(el: &LambdaElement, v: u32, k: u32) -> (i64, Complex64) {
    let s = el.s();
    let angle = TAU * (k as f64) * (s as f64) / (v as f64);
    (s, Complex64::from_polar(1.0, angle))
}

/// `Σ_{ψ ∈ Λ★} Φ_Y(ψ)^t`.
pub fn lambda_root_sum(v: u32, k: u32, t: u64) -> Result<Complex64> {
    let derived = derive_params(&DesignParams::new(v, k, t)?);
    if !derived.lambda_is_integer() {
        return param(format!(
            "root sum needs t k(k-1)/(v(v-1)) integral; got λ = {}",
            derived.lambda
        ));
    }
    let cf = CharFn::new(v, k)?;
    let mut sum = Complex64::new(0.0, 0.0);
    for el in enumerate_lambda_star(v, k)? {
        let z = cf.phi_y(el.psi.angles())?;
        // |z| = 1 up to rounding; raise in polar form
        let arg = z.arg() * t as f64;
        sum += Complex64::from_polar(z.norm().powf(t as f64), arg);
    }
    Ok(sum)
}

/// Which bad region to sample from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    B,
    C,
}

/// Largest residue, modulo `2π/(k-1)`, over all pairwise coordinate differences.
pub fn max_difference_residue(mu: &[f64], k: u32) -> f64 {
    let h = TAU / (k as f64 - 1.0);
    let mut best: f64 = 0.0;
    for (i, &a) in mu.iter().enumerate() {
        for &b in &mu[i + 1..] {
            best = best.max(circular_residue(a - b, h));
        }
    }
    best
}

fn check_region_args(v: u32, k: u32, delta: f64) -> Result<()> {
    check_exhaustive(v, k)?;
    if k < 2 {
        return param("regions need k >= 2");
    }
    let cap = PI / (2.0 * (k as f64 - 1.0));
    if !(delta > 0.0 && delta < cap) {
        return param(format!("delta must lie in (0, {cap}), got {delta}"));
    }
    Ok(())
}

/// Draws one point from `R_B` or `R_C` (see [`Sampler`]).
pub fn sample_region(v: u32, k: u32, delta: f64, which: Region, seed: u64) -> Result<PhaseVector> {
    Sampler::new(v, k, delta, seed)?.sample(which)
}

/// Seeded sampler for repeated draws.
///
/// `C`: a mixture of uniform points and points within `3δ` of `Λ₀`, kept only
/// when the largest difference residue is at least `2δ`, which rules out
/// membership in `R_A ∪ R_B`.
///
/// `B`: `ψ + γ1 + (2π/(k-1)) e_p + ζ` for random `ψ ∈ Λ★`, `γ`, pair `p`, and
/// `ζ ∈ (-δ, δ)^d`; the offset point is checked to lie outside `Λ_X`.
pub struct Sampler {
    cf: CharFn,
    lambda: Vec<LambdaElement>,
    delta: f64,
    rng: ChaCha8Rng,
}

const MAX_REJECTIONS: usize = 100_000;

impl Sampler {
    pub fn new(v: u32, k: u32, delta: f64, seed: u64) -> Result<Self> {
        check_region_args(v, k, delta)?;
        Ok(Self {
            cf: CharFn::new(v, k)?,
            lambda: enumerate_lambda_star(v, k)?,
            delta,
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    pub fn charfn(&self) -> &CharFn {
        &self.cf
    }

    pub fn sample(&mut self, which: Region) -> Result<PhaseVector> {
        match which {
            Region::B => self.sample_b().map(|(_, p)| p),
            Region::C => self.sample_c(),
        }
    }

    fn h(&self) -> f64 {
        TAU / (self.cf.k as f64 - 1.0)
    }

    fn sample_c(&mut self) -> Result<PhaseVector> {
        let d = self.cf.d;
        let k = self.cf.k;
        let h = self.h();
        for _ in 0..MAX_REJECTIONS {
            let near = self.rng.random_bool(0.5);
            let mu: Vec<f64> = if near {
                let gamma = self.rng.random_range(-PI..PI);
                let spread = 3.0 * self.delta;
                (0..d)
                    .map(|_| {
                        let shift = self.rng.random_range(0..(k - 1).max(1)) as f64 * h;
                        gamma + shift + self.rng.random_range(-spread..spread)
                    })
                    .collect()
            } else {
                (0..d).map(|_| self.rng.random_range(-PI..PI)).collect()
            };
            if max_difference_residue(&mu, k) >= 2.0 * self.delta {
                return Ok(PhaseVector::new(mu));
            }
        }
        Err(Error::EmptyRegion("region C rejection sampler exhausted".into()))
    }

    /// Returns `(ℓ, ℓ + ζ)`.
    pub fn sample_b(&mut self) -> Result<(PhaseVector, PhaseVector)> {
        if self.cf.k == 2 {
            return Err(Error::EmptyRegion("R_B is empty when k = 2".into()));
        }
        let d = self.cf.d;
        let h = self.h();
        for _ in 0..MAX_REJECTIONS {
            let psi = &self.lambda[self.rng.random_range(0..self.lambda.len())].psi;
            let gamma = self.rng.random_range(0.0..TAU);
            let p = self.rng.random_range(0..d);
            let ell: Vec<f64> = psi
                .angles()
                .iter()
                .enumerate()
                .map(|(i, &x)| x + gamma + if i == p { h } else { 0.0 })
                .collect();
            if self.cf.is_in_lambda_x(&ell, CIRCLE_TOL)? {
                continue;
            }
            let mu: Vec<f64> = ell
                .iter()
                .map(|&x| x + self.rng.random_range(-self.delta..self.delta))
                .collect();
            return Ok((PhaseVector::new(ell), PhaseVector::new(mu)));
        }
        Err(Error::EmptyRegion("no Λ₀ \\ Λ_X offset found".into()))
    }

    /// `γ1 + ζ` with `γ ∈ [-π, π)` and `|ζ| < δ`: a point of the central
    /// tube. Returned unreduced, since `Φ_Y` is not `2π`-periodic per coordinate.
    pub fn sample_tube(&mut self) -> Vec<f64> {
        let gamma = self.rng.random_range(-PI..PI);
        let delta = self.delta;
        (0..self.cf.d)
            .map(|_| gamma + self.rng.random_range(-delta..delta))
            .collect()
    }

    pub fn uniform_phase(&mut self) -> PhaseVector {
        PhaseVector::new((0..self.cf.d).map(|_| self.rng.random_range(-PI..PI)).collect())
    }
}

/// Number of columns, `C(v, k)`, as `f64`.
pub fn column_count_f64(v: u32, k: u32) -> f64 {
    binomial_u64(v.into(), k.into()) as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduce_range() {
        for x in [-10.0, -PI, 0.0, PI, 3.0 * PI, 7.5] {
            let r = reduce_angle(x);
            assert!((-PI..PI).contains(&r));
            assert!(circular_residue(r - x, TAU) < 1e-12);
        }
    }

    #[test]
    fn phi_at_zero_and_diagonal() {
        let (x, y) = phi(5, 3, &PhaseVector::zeros(10)).unwrap();
        assert!((x - 1.0).norm() < 1e-15 && (y - 1.0).norm() < 1e-15);
        let g = 0.7;
        let (x, y) = phi(5, 3, &PhaseVector::constant(10, g)).unwrap();
        assert!((x - Complex64::from_polar(1.0, 3.0 * g)).norm() < 1e-12);
        assert!((y - 1.0).norm() < 1e-12);
    }

    #[test]
    fn single_coordinate_pi() {
        let mut a = vec![0.0; 10];
        a[0] = PI;
        let ell = PhaseVector::new(a);
        let (x, _) = phi(5, 3, &ell).unwrap();
        assert!((x.norm() - 0.4).abs() < 1e-12);
        assert!(!is_in_lambda_x(5, 3, &ell, CIRCLE_TOL).unwrap());
    }

    #[test]
    fn lambda_counts() {
        assert_eq!(enumerate_lambda_star(5, 3).unwrap().len(), 16);
        assert_eq!(enumerate_lambda_star(6, 4).unwrap().len(), 243);
        let two = enumerate_lambda_star(7, 2).unwrap();
        assert_eq!(two.len(), 1);
        assert!(two[0].psi.angles().iter().all(|&x| x == 0.0));
        assert!(enumerate_lambda_star(5, 1).is_err());
    }

    #[test]
    fn lambda_phase_examples() {
        let cf = CharFn::new(5, 3).unwrap();
        let el = LambdaElement::new(5, 3, 1, vec![0, 0, 0]).unwrap();
        let (s, ph) = lambda_phase(&el, 5, 3);
        assert_eq!(s, 1);
        assert!((ph - Complex64::from_polar(1.0, 6.0 * PI / 5.0)).norm() < 1e-12);
        assert!((cf.phi_y(&el.psi_box(5, 3)).unwrap() - ph).norm() < 1e-10);

        let el = LambdaElement::new(5, 3, 0, vec![1, 0, 0]).unwrap();
        let (s, ph) = lambda_phase(&el, 5, 3);
        assert_eq!(s, -1);
        assert!((ph - Complex64::from_polar(1.0, -6.0 * PI / 5.0)).norm() < 1e-12);
        assert!((cf.phi_y(&el.psi_box(5, 3)).unwrap() - ph).norm() < 1e-10);
    }

    #[test]
    fn phase_identity_on_all_elements() {
        for (v, k) in [(5, 3), (6, 4), (7, 3)] {
            let cf = CharFn::new(v, k).unwrap();
            for el in enumerate_lambda_star(v, k).unwrap() {
                let (_, ph) = lambda_phase(&el, v, k);
                assert!((cf.phi_y(&el.psi_box(v, k)).unwrap() - ph).norm() < 1e-10);
                assert!((cf.phi_y(el.psi.angles()).unwrap().norm() - 1.0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn root_sums() {
        let z = lambda_root_sum(6, 3, 10).unwrap();
        assert!((z - 32.0).norm() < 1e-8);
        let z = lambda_root_sum(6, 3, 5).unwrap();
        assert!(z.norm() < 1e-8);
        let z = lambda_root_sum(5, 3, 10).unwrap();
        assert!((z - 16.0).norm() < 1e-8);
        assert!(lambda_root_sum(5, 3, 3).is_err());
    }

    #[test]
    fn region_b_empty_for_k2() {
        assert!(matches!(
            sample_region(6, 2, 0.01, Region::B, 1),
            Err(Error::EmptyRegion(_))
        ));
    }

    #[test]
    fn region_samplers_respect_construction() {
        let mut s = Sampler::new(5, 3, 0.01, 7).unwrap();
        for _ in 0..50 {
            let c = s.sample(Region::C).unwrap();
            assert!(max_difference_residue(c.angles(), 3) >= 0.02);
        }
        let (ell, _) = s.sample_b().unwrap();
        assert!(s.charfn().phi_x(ell.angles()).unwrap().norm() < 1.0 - 1e-9);
    }

    #[test]
    fn sampler_is_deterministic() {
        let a = sample_region(6, 3, 0.05, Region::C, 99).unwrap();
        let b = sample_region(6, 3, 0.05, Region::C, 99).unwrap();
        assert_eq!(a, b);
    }
}
