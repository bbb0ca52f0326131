//! Exponential of a symmetric matrix through its eigendecomposition.

use crate::eigen::jacobi_eigen;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Real;

/// Rejects `S` when `max|S − Sᵀ| > 1e−12·(1 + max|S|)`.
pub fn check_symmetric<T: Real>(s: &Matrix<T>) -> Result<()> {
    s.dim()?;
    let residual = s.symmetry_residual();
    let tolerance = T::tol(1e-12) * (T::one() + s.max_abs());
    if residual > tolerance || !s.all_finite() {
        return Err(Error::NotSymmetric { residual: residual.as_f64(), tolerance: tolerance.as_f64() });
    }
    Ok(())
}

/// `exp(tS)` for symmetric `S`; the result is symmetric positive definite.
pub fn sym_exp<T: Real>(s: &Matrix<T>, t: T) -> Result<Matrix<T>> {
    check_symmetric(s)?;
    let (vals, v) = jacobi_eigen(s, 100)?;
    Ok(spectral_function(&vals, &v, |x| (t * x).exp()))
}

/// `V f(Λ) Vᵀ`, symmetrized.
pub(crate) fn spectral_function<T: Real>(vals: &[T], v: &Matrix<T>, f: impl Fn(T) -> T) -> Matrix<T> {
    let n = vals.len();
    let fv: Vec<T> = vals.iter().map(|&x| f(x)).collect();
    let mut out = Matrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let mut acc = T::zero();
            for k in 0..n {
                acc += v[(i, k)] * fv[k] * v[(j, k)];
            }
            out[(i, j)] = acc;
            out[(j, i)] = acc;
        }
    }
    out
}
