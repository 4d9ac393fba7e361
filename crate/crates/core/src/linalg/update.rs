//! Low-rank update identities: the matrix determinant lemma and the
//! (generalized) Sherman-Morrison-Woodbury inverse.

use super::{lu_det_inverse, Matrix};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

fn check_update<T: Scalar>(w: &Matrix<T>, u: &Matrix<T>, v: &Matrix<T>) -> Result<()> {
    let n = w.rows();
    if !w.is_square() || u.rows() != n || v.rows() != n || u.cols() != v.cols() {
        return Err(Error::Dimension(format!(
            "update needs W n x n and U, V n x m; got W {}x{}, U {}x{}, V {}x{}",
            w.rows(),
            w.cols(),
            u.rows(),
            u.cols(),
            v.rows(),
            v.cols()
        )));
    }
    Ok(())
}

/// `det(W + U Vᵀ)` computed as `det(W) · det(I_m + Vᵀ W⁻¹ U)`.
pub fn rank_update_det<T: Scalar>(w: &Matrix<T>, u: &Matrix<T>, v: &Matrix<T>) -> Result<T> {
    check_update(w, u, v)?;
    let (det_w, w_inv) = lu_det_inverse(w)?;
    let m = u.cols();
    let small = &Matrix::identity(m) + &(&v.transpose() * &(&w_inv * u));
    let (det_small, _) = match lu_det_inverse(&small) {
        Ok(pair) => pair,
        Err(Error::MatrixSingular) => return Ok(T::zero()),
        Err(e) => return Err(e),
    };
    Ok(det_w * det_small)
}

/// `(W + Σ U_i V_iᵀ)⁻¹` via the generalized Sherman-Morrison-Woodbury identity.
///
/// The block capacitance matrix `X` has blocks `δ_ij I_m + V_iᵀ W⁻¹ U_j`; a
/// singular `X` yields [`Error::UpdateSingular`].
pub fn rank_update_inverse<T: Scalar>(
    w: &Matrix<T>,
    updates: &[(Matrix<T>, Matrix<T>)],
) -> Result<Matrix<T>> {
    let w_inv = super::inverse(w)?;
    if updates.is_empty() {
        return Ok(w_inv);
    }
    let m = updates[0].0.cols();
    for (u, v) in updates {
        check_update(w, u, v)?;
        if u.cols() != m {
            return Err(Error::Dimension("all updates must share a width".into()));
        }
    }
    let mut u_all = updates[0].0.clone();
    let mut v_all = updates[0].1.clone();
    for (u, v) in &updates[1..] {
        u_all = u_all.hstack(u)?;
        v_all = v_all.hstack(v)?;
    }
    let w_inv_u = &w_inv * &u_all;
    let x = &Matrix::identity(u_all.cols()) + &(&v_all.transpose() * &w_inv_u);
    let x_inv = match super::inverse(&x) {
        Ok(inv) => inv,
        Err(Error::MatrixSingular) => return Err(Error::UpdateSingular),
        Err(e) => return Err(e),
    };
    let correction = &(&w_inv_u * &x_inv) * &(&v_all.transpose() * &w_inv);
    Ok(&w_inv - &correction)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::determinant;
    use crate::scalar::ratio;
    use num_rational::BigRational;

    fn ones(n: usize) -> Matrix<BigRational> {
        Matrix::from_fn(n, 1, |_, _| ratio(1, 1))
    }

    #[test]
    fn zero_update_is_plain_det() {
        let w = Matrix::<BigRational>::identity(3);
        let z = Matrix::zeros(3, 1);
        assert_eq!(rank_update_det(&w, &z, &z).unwrap(), ratio(1, 1));
        assert_eq!(rank_update_inverse(&w, &[(z.clone(), z)]).unwrap(), w);
    }

    #[test]
    fn two_by_two_hand_example() {
        let w = Matrix::<BigRational>::identity(2).scale(&ratio(2, 1));
        let x = ones(2);
        assert_eq!(rank_update_det(&w, &x, &x).unwrap(), ratio(8, 1));
        assert_eq!(determinant(&(&w + &(&x * &x.transpose()))).unwrap(), ratio(8, 1));
    }

    #[test]
    fn singular_capacitance_detected() {
        // I - x xᵀ/2 on R^2 is singular
        let w = Matrix::<BigRational>::identity(2);
        let u = ones(2).scale(&ratio(-1, 2));
        let v = ones(2);
        assert_eq!(
            rank_update_inverse(&w, &[(u.clone(), v.clone())]).unwrap_err(),
            Error::UpdateSingular
        );
        assert_eq!(rank_update_det(&w, &u, &v).unwrap(), ratio(0, 1));
    }

    #[test]
    fn singular_w_rejected() {
        let w = Matrix::<BigRational>::zeros(2, 2);
        let x = ones(2);
        assert_eq!(rank_update_det(&w, &x, &x).unwrap_err(), Error::MatrixSingular);
    }
}
