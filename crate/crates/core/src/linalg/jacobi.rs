use super::Matrix;
use crate::error::{param, Result};
use crate::scalar::{real, RealScalar};

const MAX_SWEEPS: usize = 100;

/// Eigenvalues (ascending) and matching column eigenvectors of a symmetric matrix.
#[derive(Debug, Clone)]
pub struct Eigen<T> {
    pub values: Vec<T>,
    pub vectors: Matrix<T>,
}

/// Cyclic Jacobi rotations. Stops once the off-diagonal Frobenius mass drops
/// below `max(1e-13, 4 eps) * ||A||_F` or after 100 sweeps.
pub fn jacobi_eigen<T: RealScalar>(a: &Matrix<T>) -> Result<Eigen<T>> {
    if !a.is_square() {
        return param(format!(
            "jacobi needs a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        ));
    }
    let n = a.rows();
    let scale = a.frobenius();
    let sym_tol = 1e-12 * scale.max(f64::MIN_POSITIVE);
    for i in 0..n {
        for j in 0..i {
            if (a[(i, j)] - a[(j, i)]).as_f64().abs() > sym_tol {
                return param("jacobi needs a symmetric matrix");
            }
        }
    }

    let mut m = a.clone();
    let mut vecs = Matrix::<T>::identity(n);
    let rel = 1e-13f64.max(4.0 * T::epsilon().as_f64());
    let tol = rel * scale;
    let two = real::<T>(2.0);

    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[(i, j)].as_f64().powi(2))
            .sum::<f64>()
            .sqrt();
        if off <= tol {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                if apq == T::zero() {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (two * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = vecs[(k, p)];
                    let vkq = vecs[(k, q)];
                    vecs[(k, p)] = c * vkp - s * vkq;
                    vecs[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].partial_cmp(&m[(j, j)]).expect("finite eigenvalues"));
    Ok(Eigen {
        values: order.iter().map(|&i| m[(i, i)]).collect(),
        vectors: Matrix::from_fn(n, n, |r, c| vecs[(r, order[c])]),
    })
}

/// Symmetric square root `V diag(sqrt(λ)) Vᵀ`, plus the smallest eigenvalue.
/// Returns `None` for the root when the matrix is not positive definite.
pub fn symmetric_sqrt<T: RealScalar>(a: &Matrix<T>) -> Result<(Option<Matrix<T>>, T)> {
    let eig = jacobi_eigen(a)?;
    let n = a.rows();
    let min = eig.values.first().copied().unwrap_or_else(T::one);
    if min <= T::zero() {
        return Ok((None, min));
    }
    let roots: Vec<T> = eig.values.iter().map(|x| x.sqrt()).collect();
    let p = Matrix::from_fn(n, n, |i, j| {
        (0..n).fold(T::zero(), |acc, l| {
            acc + eig.vectors[(i, l)] * roots[l] * eig.vectors[(j, l)]
        })
    });
    Ok((Some(p), min))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_input() {
        let a = Matrix::from_fn(3, 3, |i, j| if i == j { [9.0, 1.0, 4.0][i] } else { 0.0 });
        let e = jacobi_eigen(&a).unwrap();
        assert_eq!(e.values, vec![1.0, 4.0, 9.0]);
    }

    #[test]
    fn residual_small_for_dense_symmetric() {
        let a = Matrix::from_fn(5, 5, |i, j| 1.0 / (1.0 + i as f64 + j as f64));
        let e = jacobi_eigen(&a).unwrap();
        let lambda = Matrix::from_fn(5, 5, |i, j| if i == j { e.values[i] } else { 0.0 });
        let resid = &(&a * &e.vectors) - &(&e.vectors * &lambda);
        assert!(resid.max_abs() <= 1e-10 * a.frobenius());
        let orth = &(&e.vectors.transpose() * &e.vectors) - &Matrix::identity(5);
        assert!(orth.max_abs() < 1e-10);
        assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn rejects_non_symmetric() {
        let a = Matrix::from_rows(vec![vec![1.0, 2.0], vec![0.0, 1.0]]).unwrap();
        assert!(jacobi_eigen(&a).is_err());
    }

    #[test]
    fn works_in_f32() {
        let a = Matrix::from_rows(vec![vec![2.0f32, 1.0], vec![1.0, 2.0]]).unwrap();
        let e = jacobi_eigen(&a).unwrap();
        assert!((e.values[0] - 1.0).abs() < 1e-5);
        assert!((e.values[1] - 3.0).abs() < 1e-5);
    }

    #[test]
    fn sqrt_squares_back() {
        let a = Matrix::from_rows(vec![vec![4.0, 1.0], vec![1.0, 3.0]]).unwrap();
        let (p, min) = symmetric_sqrt(&a).unwrap();
        let p = p.unwrap();
        assert!(min > 0.0);
        assert!((&(&p * &p) - &a).max_abs() < 1e-12);
    }
}
