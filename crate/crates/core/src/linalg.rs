//! Thin wrappers over LAPACK routines.

use ndarray::{Array1, Array2, ShapeBuilder};
use ndarray_linalg::{Eigh, UPLO};
use num_complex::Complex64 as C64;

use crate::error::Result;

/// Eigen-decomposition of a Hermitian matrix, ascending eigenvalues.
///
/// The input is copied to column-major storage first: for row-major complex
/// input the backend returns the eigenvectors of the transpose.
pub fn eigh(a: &Array2<C64>) -> Result<(Array1<f64>, Array2<C64>)> {
    let mut f = Array2::zeros(a.raw_dim().f());
    f.assign(a);
    Ok(f.eigh(UPLO::Upper)?)
}
