//! The increment covariance `N`, its principal submatrix `M`, the `Q`
//! decomposition of `M`, determinants of `M`, and the square root `P`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::design::{c_coeff, check_exhaustive, enumerate_columns, pair_count, pairs0, z_map};
use crate::error::{param, Error, Result};
use crate::linalg::{bareiss_determinant, inverse, symmetric_sqrt, Matrix};
use crate::scalar::{ln_abs_rational, rational_to_f64};

/// `N` (d x d) and `M` (N without the `{v-1, v}` row and column).
#[derive(Debug, Clone)]
pub struct CovMatrix {
    pub n: Matrix<BigRational>,
    pub m: Matrix<BigRational>,
}

fn intersection(p: (usize, usize), q: (usize, usize)) -> usize {
    let mut c = 0;
    for a in [p.0, p.1] {
        if a == q.0 || a == q.1 {
            c += 1;
        }
    }
    c
}

pub fn build_n(v: u32, k: u32) -> Result<CovMatrix> {
    check_exhaustive(v, k)?;
    let c2 = c_coeff(v, k, 2)?;
    let c3 = if v >= 3 {
        c_coeff(v, k, 3)?
    } else {
        BigRational::zero()
    };
    let c4 = if v >= 4 {
        c_coeff(v, k, 4)?
    } else {
        BigRational::zero()
    };
    let c22 = &c2 * &c2;
    let by_size = [&c4 - &c22, &c3 - &c22, &c2 - &c22];
    let pairs = pairs0(v);
    let d = pairs.len();
    let n = Matrix::from_fn(d, d, |i, j| by_size[intersection(pairs[i], pairs[j])].clone());
    let m = n.principal_minor(d - 1);
    Ok(CovMatrix { n, m })
}

/// `M = a1 I + a2 x xᵀ + a3 Q Qᵀ`.
#[derive(Debug, Clone)]
pub struct Decomposition {
    pub a1: BigRational,
    pub a2: BigRational,
    pub a3: BigRational,
    /// `(d-1) x v`; column `a` is `β^a` with the last pair coordinate dropped.
    pub q: Matrix<BigRational>,
}

impl Decomposition {
    pub fn reconstruct(&self) -> Matrix<BigRational> {
        let n = self.q.rows();
        let ones = ones(n);
        let xxt = &ones * &ones.transpose();
        let qqt = &self.q * &self.q.transpose();
        let a = Matrix::identity(n).scale(&self.a1);
        &(&a + &xxt.scale(&self.a2)) + &qqt.scale(&self.a3)
    }
}

/// Column of ones, `x_n`.
pub fn ones(n: usize) -> Matrix<BigRational> {
    Matrix::from_fn(n, 1, |_, _| BigRational::one())
}

/// `y_n = (0, ..., 0, 1, 1)ᵀ`.
pub fn y_vec(n: usize) -> Matrix<BigRational> {
    Matrix::from_fn(n, 1, |i, _| {
        if i + 2 >= n {
            BigRational::one()
        } else {
            BigRational::zero()
        }
    })
}

/// The 0/1 matrix whose column `a` marks the pairs containing row `a`,
/// restricted to the first `d - 1` pairs.
pub fn q_matrix(v: u32) -> Matrix<BigRational> {
    let pairs = pairs0(v);
    let d = pairs.len();
    Matrix::from_fn(d - 1, v as usize, |r, a| {
        let (i, j) = pairs[r];
        if i == a || j == a {
            BigRational::one()
        } else {
            BigRational::zero()
        }
    })
}

pub fn decompose(v: u32, k: u32) -> Result<Decomposition> {
    check_exhaustive(v, k)?;
    if k < 2 || v < 4 {
        return param(format!("decomposition needs k >= 2 and v >= 4, got v={v}, k={k}"));
    }
    let c2 = c_coeff(v, k, 2)?;
    let c3 = c_coeff(v, k, 3)?;
    let c4 = c_coeff(v, k, 4)?;
    Ok(Decomposition {
        a1: &c2 - &c3 * BigRational::from_integer(2.into()) + &c4,
        a2: &c4 - &c2 * &c2,
        a3: &c3 - &c4,
        q: q_matrix(v),
    })
}

/// A determinant reported both directly and as a natural log.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetValue {
    pub value: f64,
    pub ln: f64,
}

fn check_det_domain(v: u32, k: u32) -> Result<()> {
    check_exhaustive(v, k)?;
    if k < 2 || v < k + 2 {
        return param(format!(
            "closed-form det(M) needs k >= 2 and v - k >= 2, got v={v}, k={k}"
        ));
    }
    Ok(())
}

/// Closed form of `det M` as an exact rational.
pub fn det_m_closed_exact(v: u32, k: u32) -> Result<BigRational> {
    check_det_domain(v, k)?;
    let d = pair_count(v) as i32;
    let vi = i64::from(v);
    let ki = i64::from(k);
    let r = |n: i64, m: i64| BigRational::new(BigInt::from(n), BigInt::from(m));
    if k == 2 {
        return Ok(r(1, d as i64).pow(d));
    }
    let vv = v as i32;
    Ok(r(2, 1)
        * r(ki - 1, 1).pow(d + vv - 2)
        * r(vi - ki - 1, vi - 3).pow(d - vv)
        * r(ki * (vi - ki), vi - 2).pow(d - 1)
        * r(1, vi * (vi - 1)).pow(d))
}

/// Closed form of `det M`, with its log for overflow-free downstream use.
pub fn det_m_closed(v: u32, k: u32) -> Result<DetValue> {
    let exact = det_m_closed_exact(v, k)?;
    Ok(DetValue {
        value: rational_to_f64(&exact),
        ln: ln_abs_rational(&exact),
    })
}

/// Exact determinant by fraction-free elimination.
pub fn det_m_exact(m: &Matrix<BigRational>) -> Result<BigRational> {
    bareiss_determinant(m)
}

/// `det_m_exact` converted to `f64` at the very end.
pub fn det_m_numeric(m: &Matrix<BigRational>) -> Result<f64> {
    det_m_exact(m).map(|d| rational_to_f64(&d))
}

/// `P = √M` and the box constants with `[-d1,d1]^n ⊆ P[-1,1]^n ⊆ [-d2,d2]^n`.
#[derive(Debug, Clone)]
pub struct SqrtBox {
    pub p: Matrix<f64>,
    pub p_inv: Matrix<f64>,
    pub d1: f64,
    pub d2: f64,
    pub min_eigenvalue: f64,
}

pub fn sqrt_and_box(m: &Matrix<f64>) -> Result<SqrtBox> {
    let (p, min) = symmetric_sqrt(m)?;
    let p = p.ok_or(Error::MatrixNotPositiveDefinite(min))?;
    let p_inv = inverse(&p)?;
    let d2 = p.norm_inf();
    let d1 = 1.0 / p_inv.norm_inf();
    Ok(SqrtBox {
        p,
        p_inv,
        d1,
        d2,
        min_eigenvalue: min,
    })
}

/// `sqrt_and_box` applied to `M(v, k)`.
pub fn box_constants(v: u32, k: u32) -> Result<SqrtBox> {
    sqrt_and_box(&build_n(v, k)?.m.to_f64())
}

/// Exact `E[(μ · (Z(y) - C₂ 1))^j]` for `j = 1, 2` over a uniform column.
pub fn centered_moments(v: u32, k: u32, mu: &[BigRational]) -> Result<(BigRational, BigRational)> {
    let d = pair_count(v);
    if mu.len() != d {
        return Err(Error::Dimension(format!("μ has length {}, need {d}", mu.len())));
    }
    let cols = enumerate_columns(v, k)?;
    let c2 = c_coeff(v, k, 2)?;
    let mu_sum: BigRational = mu.iter().sum();
    let shift = &c2 * &mu_sum;
    let mut first = BigRational::zero();
    let mut second = BigRational::zero();
    for y in &cols {
        let dot: BigRational = z_map(y)
            .coords
            .iter()
            .zip(mu)
            .filter(|(z, _)| **z == 1)
            .map(|(_, m)| m.clone())
            .sum();
        let centered = dot - &shift;
        second += &centered * &centered;
        first += centered;
    }
    let count = BigRational::from_integer(BigInt::from(cols.len()));
    Ok((first / &count, second / count))
}

/// `μᵀ A μ`.
pub fn quadratic_form(a: &Matrix<BigRational>, mu: &[BigRational]) -> BigRational {
    let mut acc = BigRational::zero();
    for i in 0..a.rows() {
        if mu[i].is_zero() {
            continue;
        }
        let row: BigRational = a.row(i).iter().zip(mu).map(|(x, m)| x * m).sum();
        acc += &mu[i] * row;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ratio;

    #[test]
    fn n_entries() {
        let c = build_n(4, 2).unwrap();
        assert_eq!(c.n[(0, 0)], ratio(5, 36));
        let c = build_n(5, 3).unwrap();
        assert_eq!(c.n[(0, 1)], ratio(1, 100));
        assert_eq!(c.m.rows(), 9);
    }

    #[test]
    fn n_kills_ones() {
        let c = build_n(6, 3).unwrap();
        let prod = &c.n * &ones(15);
        assert!(prod.iter().all(Zero::is_zero));
    }

    #[test]
    fn decomposition_reconstructs_m() {
        for (v, k) in [(5, 3), (6, 3), (6, 2), (7, 4)] {
            let dec = decompose(v, k).unwrap();
            assert_eq!(dec.reconstruct(), build_n(v, k).unwrap().m);
        }
        assert_eq!(decompose(5, 3).unwrap().a3, ratio(1, 10));
    }

    #[test]
    fn q_identities() {
        let v = 6u32;
        let n = v as usize;
        let q = q_matrix(v);
        let qtq = &q.transpose() * &q;
        let x = ones(n);
        let y = y_vec(n);
        let rhs = &(&Matrix::identity(n).scale(&ratio(v as i64 - 2, 1)) + &(&x * &x.transpose()))
            - &(&y * &y.transpose());
        assert_eq!(qtq, rhs);

        let xd = ones(q.rows());
        let lhs = &xd.transpose() * &q;
        let rhs = &x.transpose().scale(&ratio(v as i64 - 1, 1)) - &y.transpose();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn det_closed_small() {
        assert_eq!(det_m_closed_exact(4, 2).unwrap(), ratio(1, 46656));
        assert_eq!(det_m_closed_exact(5, 3).unwrap(), ratio(1, 39_062_500));
        let dv = det_m_closed(4, 2).unwrap();
        assert!((dv.value - 2.143347e-5).abs() < 1e-11);
        assert!((dv.ln - dv.value.ln()).abs() < 1e-12);
        assert!(det_m_closed(4, 3).is_err());
        assert!(det_m_closed(5, 1).is_err());
    }

    #[test]
    fn det_numeric_matches_closed() {
        for (v, k) in [(4, 2), (5, 3), (6, 4)] {
            let m = build_n(v, k).unwrap().m;
            assert_eq!(det_m_exact(&m).unwrap(), det_m_closed_exact(v, k).unwrap());
        }
        assert_eq!(det_m_numeric(&Matrix::identity(3)).unwrap(), 1.0);
    }

    #[test]
    fn sqrt_box_identity_and_m53() {
        let b = sqrt_and_box(&Matrix::<f64>::identity(4)).unwrap();
        assert!((b.d1 - 1.0).abs() < 1e-12 && (b.d2 - 1.0).abs() < 1e-12);

        let m = build_n(5, 3).unwrap().m.to_f64();
        let b = sqrt_and_box(&m).unwrap();
        assert!((&(&b.p * &b.p) - &m).max_abs() <= 1e-10 * m.max_abs());
        assert!((b.d1 - 0.112365).abs() < 1e-5);
        assert!((b.d2 - 0.754153).abs() < 1e-5);
        assert!(b.d1 <= b.d2);
    }

    #[test]
    fn not_pd_rejected() {
        let m = build_n(5, 3).unwrap().n.to_f64();
        assert!(matches!(
            sqrt_and_box(&m),
            Err(Error::MatrixNotPositiveDefinite(_))
        ));
    }

    #[test]
    fn coefficient_combinatorics() {
        for (v, k) in [(5u32, 3u32), (6, 3), (8, 4)] {
            let d = pair_count(v) as i64;
            let vi = v as i64;
            let c2 = c_coeff(v, k, 2).unwrap();
            let c3 = c_coeff(v, k, 3).unwrap();
            let c4 = c_coeff(v, k, 4).unwrap();
            let choose = (vi - 2) * (vi - 3) / 2;
            assert_eq!(1 + 2 * (vi - 2) + choose, d);
            let lhs = &c2 + &c3 * ratio(2 * (vi - 2), 1) + &c4 * ratio(choose, 1);
            assert_eq!(lhs, &c2 * &c2 * ratio(d, 1));
        }
    }
}
