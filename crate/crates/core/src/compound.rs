//! k-th compound matrices: the action of a matrix on the exterior power ∧ᵏ.
//!
//! Rows and columns are indexed by strictly increasing k-subsets of
//! `{1..n}` in lexicographic order. That ordering is part of the contract.

use crate::error::{Error, Result};
use crate::matrix::{determinant, Matrix};
use crate::scalar::Real;

/// Compounds with `k · C(n, k)` above this many entries are refused.
pub const MAX_COMPOUND_WORK: u128 = 1_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct CompoundMatrix<T: Real> {
    pub n: usize,
    pub k: usize,
    /// Index subsets, 0-based, lexicographic.
    pub subsets: Vec<Vec<usize>>,
    /// `entries[(I, J)] = det M[I, J]`.
    pub entries: Matrix<T>,
}

impl<T: Real> CompoundMatrix<T> {
    /// Position of a 0-based increasing subset in the lexicographic order.
    pub fn position(&self, subset: &[usize]) -> Option<usize> {
        self.subsets.binary_search_by(|s| s.as_slice().cmp(subset)).ok()
    }
}

pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// All strictly increasing k-subsets of `0..n`, lexicographic.
pub fn k_subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.clone());
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if idx[i] < n - k + i {
                idx[i] += 1;
                for j in (i + 1)..k {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Validates a 1-based strictly increasing index set and converts it to 0-based.
pub fn index_set_zero_based(n: usize, k: usize, set: &[usize]) -> Result<Vec<usize>> {
    let ok = set.len() == k
        && set.iter().all(|&i| (1..=n).contains(&i))
        && set.windows(2).all(|w| w[0] < w[1]);
    if !ok {
        return Err(Error::InvalidIndexSet(set.to_vec()));
    }
    Ok(set.iter().map(|&i| i - 1).collect())
}

/// Matrix of all k×k minors of `m`, computed by LU with partial pivoting.
pub fn compound<T: Real>(m: &Matrix<T>, k: usize) -> Result<CompoundMatrix<T>> {
    let n = m.dim()?;
    if k == 0 || k > n {
        return Err(Error::OrderOutOfRange { k, n });
    }
    let count = binomial(n, k);
    if count.saturating_mul(k as u128) > MAX_COMPOUND_WORK {
        return Err(Error::TooLarge { n, k });
    }
    let subsets = k_subsets(n, k);
    let c = subsets.len();
    let mut entries = Matrix::zeros(c, c);
    for (a, rows) in subsets.iter().enumerate() {
        for (b, cols) in subsets.iter().enumerate() {
            entries[(a, b)] = determinant(&m.select(rows, cols))?;
        }
    }
    Ok(CompoundMatrix { n, k, subsets, entries })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subsets_are_lexicographic() {
        let s = k_subsets(4, 2);
        assert_eq!(s, vec![vec![0, 1], vec![0, 2], vec![0, 3], vec![1, 2], vec![1, 3], vec![2, 3]]);
        assert_eq!(k_subsets(3, 3), vec![vec![0, 1, 2]]);
        assert_eq!(binomial(10, 3), 120);
    }

    #[test]
    fn full_order_is_determinant() {
        let m = Matrix::<f64>::from_f64_rows(&[&[2.0, 1.0, 0.0], &[1.0, 3.0, 1.0], &[0.0, 1.0, 4.0]]);
        let c = compound(&m, 3).unwrap();
        assert_eq!(c.entries.rows(), 1);
        assert!((c.entries[(0, 0)] - 18.0).abs() < 1e-13);
    }

    #[test]
    fn identity_compound_is_identity() {
        let c = compound(&Matrix::<f64>::identity(5), 2).unwrap();
        assert_eq!(c.entries, Matrix::identity(10));
    }

    #[test]
    fn first_compound_is_the_matrix() {
        let m = Matrix::<f64>::from_f64_rows(&[&[1.0, 2.0], &[3.0, 4.0]]);
        assert!(compound(&m, 1).unwrap().entries.max_abs_diff(&m) < 1e-15);
    }

    #[test]
    fn order_out_of_range_and_guard() {
        let m = Matrix::<f64>::identity(3);
        assert!(matches!(compound(&m, 0), Err(Error::OrderOutOfRange { .. })));
        assert!(matches!(compound(&m, 4), Err(Error::OrderOutOfRange { .. })));
        let big = Matrix::<f64>::identity(30);
        assert!(matches!(compound(&big, 10), Err(Error::TooLarge { .. })));
    }

    #[test]
    fn index_set_validation() {
        assert_eq!(index_set_zero_based(4, 2, &[1, 3]).unwrap(), vec![0, 2]);
        assert!(index_set_zero_based(4, 2, &[3, 1]).is_err());
        assert!(index_set_zero_based(4, 2, &[0, 1]).is_err());
        assert!(index_set_zero_based(4, 2, &[1, 5]).is_err());
        assert!(index_set_zero_based(4, 2, &[1]).is_err());
    }
}
