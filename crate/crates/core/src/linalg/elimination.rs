use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::Matrix;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

fn require_square<T: Scalar>(a: &Matrix<T>) -> Result<()> {
    if a.is_square() {
        Ok(())
    } else {
        Err(Error::Dimension(format!(
            "expected a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )))
    }
}

fn pivot_row<T: Scalar>(a: &Matrix<T>, col: usize, from: usize) -> Option<usize> {
    let mut best = None;
    let mut best_mag = 0.0;
    for r in from..a.rows() {
        let entry = &a[(r, col)];
        if entry.is_zero() {
            continue;
        }
        let mag = entry.magnitude();
        if best.is_none() || mag > best_mag {
            best = Some(r);
            best_mag = mag;
        }
    }
    best
}

fn swap_rows<T: Scalar>(a: &mut Matrix<T>, r1: usize, r2: usize) {
    if r1 == r2 {
        return;
    }
    for j in 0..a.cols() {
        let tmp = a[(r1, j)].clone();
        a[(r1, j)] = a[(r2, j)].clone();
        a[(r2, j)] = tmp;
    }
}

/// Determinant by Gaussian elimination with partial pivoting.
///
/// Exact over `BigRational`; returns zero for singular input.
pub fn determinant<T: Scalar>(a: &Matrix<T>) -> Result<T> {
    require_square(a)?;
    let n = a.rows();
    let mut m = a.clone();
    let mut det = T::one();
    for col in 0..n {
        let Some(p) = pivot_row(&m, col, col) else {
            return Ok(T::zero());
        };
        if p != col {
            swap_rows(&mut m, p, col);
            det = -det;
        }
        let pivot = m[(col, col)].clone();
        det = det * pivot.clone();
        for r in col + 1..n {
            if m[(r, col)].is_zero() {
                continue;
            }
            let factor = m[(r, col)].clone() / pivot.clone();
            for j in col..n {
                let delta = factor.clone() * m[(col, j)].clone();
                m[(r, j)] = m[(r, j)].clone() - delta;
            }
        }
    }
    Ok(det)
}

/// Determinant and inverse by Gauss-Jordan elimination on `[A | I]`.
pub fn lu_det_inverse<T: Scalar>(a: &Matrix<T>) -> Result<(T, Matrix<T>)> {
    require_square(a)?;
    let n = a.rows();
    let mut aug = a.hstack(&Matrix::identity(n))?;
    let mut det = T::one();
    for col in 0..n {
        let p = pivot_row(&aug, col, col).ok_or(Error::MatrixSingular)?;
        if p != col {
            swap_rows(&mut aug, p, col);
            det = -det;
        }
        let pivot = aug[(col, col)].clone();
        det = det * pivot.clone();
        for j in 0..2 * n {
            aug[(col, j)] = aug[(col, j)].clone() / pivot.clone();
        }
        for r in 0..n {
            if r == col || aug[(r, col)].is_zero() {
                continue;
            }
            let factor = aug[(r, col)].clone();
            for j in 0..2 * n {
                let delta = factor.clone() * aug[(col, j)].clone();
                aug[(r, j)] = aug[(r, j)].clone() - delta;
            }
        }
    }
    let inverse = Matrix::from_fn(n, n, |i, j| aug[(i, n + j)].clone());
    Ok((det, inverse))
}

/// Inverse only; see [`lu_det_inverse`].
pub fn inverse<T: Scalar>(a: &Matrix<T>) -> Result<Matrix<T>> {
    lu_det_inverse(a).map(|(_, inv)| inv)
}

/// Fraction-free (Bareiss) determinant of an integer matrix.
///
/// Every intermediate division is exact, so entries stay integral and grow
/// only polynomially.
pub fn bareiss_determinant_int(a: &[Vec<BigInt>]) -> BigInt {
    let n = a.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut m: Vec<Vec<BigInt>> = a.to_vec();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            let Some(swap) = (k + 1..n).find(|&r| !m[r][k].is_zero()) else {
                return BigInt::zero();
            };
            m.swap(k, swap);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = &m[i][j] * &m[k][k] - &m[i][k] * &m[k][j];
                m[i][j] = num / &prev;
            }
        }
        prev = m[k][k].clone();
    }
    sign * m[n - 1][n - 1].clone()
}

/// Fraction-free determinant of a rational matrix: rows are scaled to a
/// common integer lattice, eliminated by Bareiss, and the scale divided out.
pub fn bareiss_determinant(a: &Matrix<BigRational>) -> Result<BigRational> {
    require_square(a)?;
    let n = a.rows();
    let mut scale = BigInt::one();
    let mut rows = Vec::with_capacity(n);
    for i in 0..n {
        let lcm = a.row(i).iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
        rows.push(
            a.row(i)
                .iter()
                .map(|x| x.numer() * (&lcm / x.denom()))
                .collect::<Vec<_>>(),
        );
        scale *= lcm;
    }
    let det = bareiss_determinant_int(&rows);
    Ok(BigRational::new(det, scale.abs())
        * if scale.is_negative() {
            -BigRational::one()
        } else {
            BigRational::one()
        })
}
