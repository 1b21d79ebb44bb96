use faer::{Mat, Side};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Eigenvalues (ascending) and eigenvectors of a Hermitian matrix, reading
/// the lower triangle.
pub fn hermitian_eigen(m: &Mat<C64>) -> Result<(Vec<f64>, Mat<C64>)> {
    let evd = m
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::LinearAlgebra(format!("{e:?}")))?;
    let s = evd.S().column_vector();
    let w = (0..m.nrows()).map(|i| s[i].re).collect();
    Ok((w, evd.U().to_owned()))
}
