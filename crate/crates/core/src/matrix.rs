//! Dense row-major real matrices.
//!
//! Storage is 0-based; documentation and error messages use 1-based indices.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct Matrix<T: Real> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Real> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_diag(d: &[T]) -> Self {
        let mut m = Self::zeros(d.len(), d.len());
        for (i, &x) in d.iter().enumerate() {
            m[(i, i)] = x;
        }
        m
    }

    /// Builds a matrix from row slices; all rows must share one length.
    pub fn from_rows<R: AsRef<[T]>>(rows: &[R]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.as_ref().len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            let row = row.as_ref();
            if row.len() != c {
                return Err(Error::DimensionMismatch { expected: c, got: row.len() });
            }
            data.extend_from_slice(row);
        }
        Ok(Self { rows: r, cols: c, data })
    }

    /// Converts literal `f64` rows, for tests and fixtures.
    pub fn from_f64_rows(rows: &[&[f64]]) -> Self {
        let rows: Vec<Vec<T>> = rows.iter().map(|r| r.iter().map(|&x| T::lit(x)).collect()).collect();
        Self::from_rows(&rows).expect("rectangular literal")
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Side length of a square matrix.
    pub fn dim(&self) -> Result<usize> {
        if self.is_square() {
            Ok(self.rows)
        } else {
            Err(Error::NotSquare { rows: self.rows, cols: self.cols })
        }
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn diagonal(&self) -> Vec<T> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn scale(&self, s: T) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&x| x * s).collect() }
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&x| f(x)).collect() }
    }

    pub fn trace(&self) -> T {
        self.diagonal().into_iter().sum()
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, &x| m.max(x.abs()))
    }

    pub fn frobenius(&self) -> T {
        self.data.iter().map(|&x| x * x).sum::<T>().sqrt()
    }

    /// Largest absolute entrywise difference. Panics on shape mismatch.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "shape mismatch");
        self.data.iter().zip(&other.data).fold(T::zero(), |m, (&a, &b)| m.max((a - b).abs()))
    }

    /// `max |A - Aᵀ|`.
    pub fn symmetry_residual(&self) -> T {
        let mut r = T::zero();
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                r = r.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        r
    }

    /// `(A + Aᵀ)/2`.
    pub fn symmetrized(&self) -> Self {
        let half = T::lit(0.5);
        Self::from_fn(self.rows, self.cols, |i, j| half * (self[(i, j)] + self[(j, i)]))
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    /// Checked product.
    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::DimensionMismatch { expected: self.cols, got: rhs.rows });
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == T::zero() {
                    continue;
                }
                let r = rhs.row(k);
                let o = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                for (oj, &bj) in o.iter_mut().zip(r) {
                    *oj += a * bj;
                }
            }
        }
        Ok(out)
    }

    pub fn mat_vec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(self.cols, x.len(), "shape mismatch");
        (0..self.rows).map(|i| self.row(i).iter().zip(x).map(|(&a, &b)| a * b).sum()).collect()
    }

    /// Submatrix on the given row and column index lists (0-based).
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Self {
        Self::from_fn(rows.len(), cols.len(), |i, j| self[(rows[i], cols[j])])
    }

    /// Integer power of a square matrix.
    pub fn powi(&self, k: u32) -> Self {
        let n = self.rows;
        (0..k).fold(Self::identity(n), |acc, _| &acc * self)
    }

    /// Spectral (operator 2-) norm via the largest eigenvalue of `AᵀA`.
    pub fn spectral_norm(&self) -> T {
        let gram = &self.transpose() * self;
        crate::eigen::jacobi_eigen(&gram, 100)
            .map(|(vals, _)| vals.into_iter().fold(T::zero(), T::max).max(T::zero()).sqrt())
            .unwrap_or_else(|_| self.frobenius())
    }
}

/// LU factorization with partial pivoting of a square matrix, stored compactly.
pub struct Lu<T: Real> {
    lu: Matrix<T>,
    perm: Vec<usize>,
    sign: T,
}

impl<T: Real> Lu<T> {
    pub fn new(a: &Matrix<T>) -> Result<Self> {
        let n = a.dim()?;
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = T::one();
        for k in 0..n {
            let mut p = k;
            let mut best = lu[(k, k)].abs();
            for i in (k + 1)..n {
                let v = lu[(i, k)].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if p != k {
                for j in 0..n {
                    let tmp = lu[(k, j)];
                    lu[(k, j)] = lu[(p, j)];
                    lu[(p, j)] = tmp;
                }
                perm.swap(k, p);
                sign = -sign;
            }
            let pivot = lu[(k, k)];
            if pivot == T::zero() {
                continue;
            }
            for i in (k + 1)..n {
                let f = lu[(i, k)] / pivot;
                lu[(i, k)] = f;
                if f != T::zero() {
                    for j in (k + 1)..n {
                        let u = lu[(k, j)];
                        lu[(i, j)] -= f * u;
                    }
                }
            }
        }
        Ok(Self { lu, perm, sign })
    }

    pub fn determinant(&self) -> T {
        self.lu.diagonal().into_iter().fold(self.sign, |acc, d| acc * d)
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[T]) -> Result<Vec<T>> {
        let n = self.lu.rows();
        if b.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: b.len() });
        }
        let mut x: Vec<T> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for j in 0..i {
                let l = self.lu[(i, j)];
                x[i] = x[i] - l * x[j];
            }
        }
        for i in (0..n).rev() {
            for j in (i + 1)..n {
                let u = self.lu[(i, j)];
                x[i] = x[i] - u * x[j];
            }
            let d = self.lu[(i, i)];
            if d == T::zero() {
                return Err(Error::NearSingular(format!("zero pivot at {}", i + 1)));
            }
            x[i] /= d;
        }
        Ok(x)
    }

    pub fn inverse(&self) -> Result<Matrix<T>> {
        let n = self.lu.rows();
        let mut inv = Matrix::zeros(n, n);
        for j in 0..n {
            let mut e = vec![T::zero(); n];
            e[j] = T::one();
            let col = self.solve(&e)?;
            for i in 0..n {
                inv[(i, j)] = col[i];
            }
        }
        Ok(inv)
    }
}

/// Determinant by LU with partial pivoting.
pub fn determinant<T: Real>(a: &Matrix<T>) -> Result<T> {
    Ok(Lu::new(a)?.determinant())
}

/// Inverse of a lower-triangular matrix by forward substitution.
pub fn lower_triangular_inverse<T: Real>(l: &Matrix<T>) -> Result<Matrix<T>> {
    let n = l.dim()?;
    let mut inv = Matrix::zeros(n, n);
    for j in 0..n {
        for i in j..n {
            let mut s = if i == j { T::one() } else { T::zero() };
            for k in j..i {
                s -= l[(i, k)] * inv[(k, j)];
            }
            let d = l[(i, i)];
            if d == T::zero() || !d.is_finite() {
                return Err(Error::NearSingular(format!("diagonal entry {} of lower factor is {}", i + 1, d)));
            }
            inv[(i, j)] = s / d;
        }
    }
    Ok(inv)
}

impl<T: Real> Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl<T: Real> IndexMut<(usize, usize)> for Matrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

macro_rules! elementwise {
    ($tr:ident, $f:ident, $op:tt) => {
        impl<'a, T: Real> $tr<&'a Matrix<T>> for &'a Matrix<T> {
            type Output = Matrix<T>;
            fn $f(self, rhs: &'a Matrix<T>) -> Matrix<T> {
                assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch");
                Matrix {
                    rows: self.rows,
                    cols: self.cols,
                    data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| a $op b).collect(),
                }
            }
        }
        impl<T: Real> $tr for Matrix<T> {
            type Output = Matrix<T>;
            fn $f(self, rhs: Matrix<T>) -> Matrix<T> {
                (&self).$f(&rhs)
            }
        }
    };
}

elementwise!(Add, add, +);
elementwise!(Sub, sub, -);

impl<'a, T: Real> Mul<&'a Matrix<T>> for &'a Matrix<T> {
    type Output = Matrix<T>;
    fn mul(self, rhs: &'a Matrix<T>) -> Matrix<T> {
        self.matmul(rhs).expect("shape mismatch")
    }
}

impl<T: Real> Mul for Matrix<T> {
    type Output = Matrix<T>;
    fn mul(self, rhs: Matrix<T>) -> Matrix<T> {
        &self * &rhs
    }
}

impl<T: Real> Neg for &Matrix<T> {
    type Output = Matrix<T>;
    fn neg(self) -> Matrix<T> {
        self.map(|x| -x)
    }
}

impl<T: Real> fmt::Debug for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                write!(f, "{:>12.6e} ", self[(i, j)].as_f64())?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}
