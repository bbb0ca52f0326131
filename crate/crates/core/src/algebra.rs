//! Finite truncation of the Hilbert–Schmidt Lie algebra 𝔤 and its splitting
//! 𝔤 = 𝔩 ⊕ 𝔨 into lower-triangular and skew-symmetric parts.
//!
//! For `A` write `A₊`, `A₀`, `A₋` for its strict upper, diagonal and strict
//! lower parts. Then
//!
//! ```text
//! Π_𝔨 A  = A₊ − A₊ᵀ            Π_𝔩 A  = A₋ + A₀ + A₊ᵀ
//! Π*_𝔨 L = L₋ − L₊ᵀ            Π*_𝔩 L = L₊ + L₀ + L₊ᵀ
//! R = Π_𝔩 − Π_𝔨
//! ```
//!
//! where the starred maps are duals with respect to the trace pairing
//! `(A, B) = Σ A_ij B_ji`.

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Real;

fn check_square<T: Real>(a: &Matrix<T>) -> Result<usize> {
    a.dim()
}

fn check_pair<T: Real>(a: &Matrix<T>, b: &Matrix<T>) -> Result<usize> {
    let n = check_square(a)?;
    if b.rows() != n || b.cols() != n {
        return Err(Error::DimensionMismatch { expected: n, got: b.rows().max(b.cols()) });
    }
    Ok(n)
}

/// Π_𝔨 A = A₊ − A₊ᵀ. Always antisymmetric.
pub fn project_skew<T: Real>(a: &Matrix<T>) -> Result<Matrix<T>> {
    let n = check_square(a)?;
    Ok(Matrix::from_fn(n, n, |i, j| match i.cmp(&j) {
        std::cmp::Ordering::Less => a[(i, j)],
        std::cmp::Ordering::Greater => -a[(j, i)],
        std::cmp::Ordering::Equal => T::zero(),
    }))
}

/// Π_𝔩 A = A₋ + A₀ + A₊ᵀ. Always lower triangular.
pub fn project_lower<T: Real>(a: &Matrix<T>) -> Result<Matrix<T>> {
    let n = check_square(a)?;
    Ok(Matrix::from_fn(n, n, |i, j| match i.cmp(&j) {
        std::cmp::Ordering::Less => T::zero(),
        std::cmp::Ordering::Greater => a[(i, j)] + a[(j, i)],
        std::cmp::Ordering::Equal => a[(i, i)],
    }))
}

/// R(A) = Π_𝔩 A − Π_𝔨 A.
pub fn r_matrix<T: Real>(a: &Matrix<T>) -> Result<Matrix<T>> {
    Ok(&project_lower(a)? - &project_skew(a)?)
}

/// Π*_𝔨 L = L₋ − L₊ᵀ.
pub fn dual_project_skew<T: Real>(l: &Matrix<T>) -> Result<Matrix<T>> {
    let n = check_square(l)?;
    Ok(Matrix::from_fn(n, n, |i, j| if i > j { l[(i, j)] - l[(j, i)] } else { T::zero() }))
}

/// Π*_𝔩 L = L₊ + L₀ + L₊ᵀ. Symmetric, carrying the upper triangle of `L`.
pub fn dual_project_lower<T: Real>(l: &Matrix<T>) -> Result<Matrix<T>> {
    let n = check_square(l)?;
    Ok(Matrix::from_fn(n, n, |i, j| if i <= j { l[(i, j)] } else { l[(j, i)] }))
}

/// Ad-invariant pairing `(A, B) = Σ A_ij B_ji = tr(AB)`.
pub fn ad_pairing<T: Real>(a: &Matrix<T>, b: &Matrix<T>) -> Result<T> {
    let n = check_pair(a, b)?;
    let mut s = T::zero();
    for i in 0..n {
        for j in 0..n {
            s += a[(i, j)] * b[(j, i)];
        }
    }
    Ok(s)
}

/// Hilbert–Schmidt inner product `Σ A_ij B_ij = tr(AᵀB)`.
pub fn hs_inner<T: Real>(a: &Matrix<T>, b: &Matrix<T>) -> Result<T> {
    check_pair(a, b)?;
    Ok(a.as_slice().iter().zip(b.as_slice()).map(|(&x, &y)| x * y).sum())
}

/// `[A, B] = AB − BA`.
pub fn commutator<T: Real>(a: &Matrix<T>, b: &Matrix<T>) -> Result<Matrix<T>> {
    check_pair(a, b)?;
    Ok(&(a * b) - &(b * a))
}

/// Second Lie bracket `[A, B]_R = ½([R A, B] + [A, R B])`.
pub fn r_bracket<T: Real>(a: &Matrix<T>, b: &Matrix<T>) -> Result<Matrix<T>> {
    check_pair(a, b)?;
    let lhs = commutator(&r_matrix(a)?, b)?;
    let rhs = commutator(a, &r_matrix(b)?)?;
    Ok((&lhs + &rhs).scale(T::lit(0.5)))
}

/// Left side minus right side of the modified Yang–Baxter equation,
/// `[RA, RB] − R([RA, B] + [A, RB]) + [A, B]`, which vanishes identically.
pub fn mybe_residual<T: Real>(a: &Matrix<T>, b: &Matrix<T>) -> Result<Matrix<T>> {
    check_pair(a, b)?;
    let ra = r_matrix(a)?;
    let rb = r_matrix(b)?;
    let inner = &commutator(&ra, b)? + &commutator(a, &rb)?;
    let out = &(&commutator(&ra, &rb)? - &r_matrix(&inner)?) + &commutator(a, b)?;
    Ok(out)
}

/// Lie–Poisson bracket `{F₁, F₂}_R(L) = (L, [dF₁, dF₂]_R)` from supplied gradients.
pub fn lie_poisson_bracket<T: Real>(grad_f1: &Matrix<T>, grad_f2: &Matrix<T>, l: &Matrix<T>) -> Result<T> {
    check_pair(grad_f1, grad_f2)?;
    check_pair(grad_f1, l)?;
    ad_pairing(l, &r_bracket(grad_f1, grad_f2)?)
}

/// Right side of the hierarchy Lax equation `L̇ = ½[L, Π_𝔨 Lʲ]`.
pub fn hierarchy_vector_field<T: Real>(l: &Matrix<T>, j: u32) -> Result<Matrix<T>> {
    let skew = project_skew(&l.powi(j))?;
    Ok(commutator(l, &skew)?.scale(T::lit(0.5)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[f64]]) -> Matrix<f64> {
        Matrix::from_f64_rows(rows)
    }

    #[test]
    fn projections_of_small_matrix() {
        let a = m(&[&[1.0, 2.0], &[3.0, 4.0]]);
        assert_eq!(project_skew(&a).unwrap(), m(&[&[0.0, 2.0], &[-2.0, 0.0]]));
        assert_eq!(project_lower(&a).unwrap(), m(&[&[1.0, 0.0], &[5.0, 4.0]]));
        assert_eq!(r_matrix(&a).unwrap(), m(&[&[1.0, -2.0], &[7.0, 4.0]]));
    }

    #[test]
    fn projections_fix_their_subalgebras() {
        let diag = Matrix::from_diag(&[1.0, -2.0, 3.0]);
        assert_eq!(project_skew(&diag).unwrap(), Matrix::zeros(3, 3));
        let lower = m(&[&[1.0, 0.0, 0.0], &[2.0, 3.0, 0.0], &[4.0, 5.0, 6.0]]);
        assert_eq!(project_lower(&lower).unwrap(), lower);
        assert_eq!(r_matrix(&lower).unwrap(), lower);
        let skew = m(&[&[0.0, 1.0, -2.0], &[-1.0, 0.0, 3.0], &[2.0, -3.0, 0.0]]);
        assert_eq!(r_matrix(&skew).unwrap(), -&skew);
    }

    #[test]
    fn dual_projections_of_symmetric_and_diagonal() {
        let s = m(&[&[1.0, 2.0, 3.0], &[2.0, 4.0, 5.0], &[3.0, 5.0, 6.0]]);
        assert_eq!(dual_project_lower(&s).unwrap(), s);
        assert_eq!(dual_project_skew(&s).unwrap(), Matrix::zeros(3, 3));
        let d = Matrix::from_diag(&[1.0, 2.0]);
        assert_eq!(dual_project_skew(&d).unwrap(), Matrix::zeros(2, 2));
    }

    #[test]
    fn pairings() {
        let i3 = Matrix::<f64>::identity(3);
        assert_eq!(ad_pairing(&i3, &i3).unwrap(), 3.0);
        let s = m(&[&[1.0, 2.0], &[2.0, 5.0]]);
        let k = m(&[&[0.0, 7.0], &[-7.0, 0.0]]);
        assert_eq!(ad_pairing(&s, &k).unwrap(), 0.0);
        assert_eq!(hs_inner(&s, &s).unwrap(), 34.0);
        assert!(ad_pairing(&s, &i3).is_err());
    }

    #[test]
    fn brackets() {
        let b = m(&[&[1.0, 2.0], &[3.0, 4.0]]);
        assert_eq!(commutator(&Matrix::identity(2), &b).unwrap(), Matrix::zeros(2, 2));
        let l1 = m(&[&[1.0, 0.0], &[2.0, 3.0]]);
        let l2 = m(&[&[-1.0, 0.0], &[5.0, 2.0]]);
        assert_eq!(r_bracket(&l1, &l2).unwrap(), commutator(&l1, &l2).unwrap());
        assert_eq!(lie_poisson_bracket(&b, &b, &l1).unwrap(), 0.0);
        assert_eq!(lie_poisson_bracket(&b, &l1, &Matrix::zeros(2, 2)).unwrap(), 0.0);
    }

    #[test]
    fn non_square_rejected() {
        let a = Matrix::<f64>::zeros(2, 3);
        assert!(matches!(project_skew(&a), Err(Error::NotSquare { .. })));
    }
}
