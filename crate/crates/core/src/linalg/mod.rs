//! Dense linear algebra over exact rationals and reals.

mod elimination;
mod jacobi;
mod matrix;
mod update;

pub use elimination::{bareiss_determinant, bareiss_determinant_int, determinant, inverse, lu_det_inverse};
pub use jacobi::{jacobi_eigen, symmetric_sqrt, Eigen};
pub use matrix::Matrix;
pub use update::{rank_update_det, rank_update_inverse};
