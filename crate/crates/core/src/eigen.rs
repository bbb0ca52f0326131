//! Cyclic Jacobi eigensolver for real symmetric matrices.
//!
//! Jacobi rotations keep the accumulated eigenvector matrix orthogonal to
//! working precision and resolve small eigenvalues of positive definite
//! matrices to high relative accuracy, which is what the long-time
//! diagnostics depend on. Cost is O(n³) per sweep; fine at desk scale.

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Real;

/// Eigenvalues (unsorted) and eigenvectors (columns) of a symmetric matrix.
///
/// Only the upper triangle of `a` is trusted; the caller checks symmetry.
pub fn jacobi_eigen<T: Real>(a: &Matrix<T>, max_sweeps: usize) -> Result<(Vec<T>, Matrix<T>)> {
    let n = a.dim()?;
    let mut a = a.symmetrized();
    let mut v = Matrix::identity(n);
    let eps = T::epsilon();
    let tiny = T::min_positive_value();

    for _ in 0..max_sweeps {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let app = a[(p, p)];
                let aqq = a[(q, q)];
                let scale = (app.abs() * aqq.abs()).sqrt();
                if apq.abs() <= eps * scale || apq.abs() <= tiny {
                    a[(p, q)] = T::zero();
                    a[(q, p)] = T::zero();
                    continue;
                }
                rotated = true;
                let theta = (aqq - app) / (apq + apq);
                let t = if theta.abs() > T::lit(1e150) {
                    T::lit(0.5) / theta
                } else {
                    tan_half(theta)
                };
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                a[(p, p)] = app - t * apq;
                a[(q, q)] = aqq + t * apq;
                a[(p, q)] = T::zero();
                a[(q, p)] = T::zero();
                for r in 0..n {
                    if r != p && r != q {
                        let arp = a[(r, p)];
                        let arq = a[(r, q)];
                        let np = c * arp - s * arq;
                        let nq = s * arp + c * arq;
                        a[(r, p)] = np;
                        a[(p, r)] = np;
                        a[(r, q)] = nq;
                        a[(q, r)] = nq;
                    }
                    let vrp = v[(r, p)];
                    let vrq = v[(r, q)];
                    v[(r, p)] = c * vrp - s * vrq;
                    v[(r, q)] = s * vrp + c * vrq;
                }
            }
        }
        if !rotated {
            return Ok((a.diagonal(), v));
        }
    }
    let mut off = T::zero();
    for p in 0..n {
        for q in (p + 1)..n {
            off = off.max(a[(p, q)].abs());
        }
    }
    Err(Error::NoConvergence { sweeps: max_sweeps, off: off.as_f64() })
}

/// Smaller root of `t² + 2θt − 1 = 0`, the tangent of the rotation angle.
fn tan_half<T: Real>(theta: T) -> T {
    let t = T::one() / (theta.abs() + (theta * theta + T::one()).sqrt());
    if theta < T::zero() {
        -t
    } else {
        t
    }
}
