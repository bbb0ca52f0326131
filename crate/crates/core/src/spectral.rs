//! Spectral data of symmetric matrices with the first-row-positive sign
//! convention, and closed-form spectral evolution under the Toda flows.

use serde::{Deserialize, Serialize};

use crate::compound::{binomial, index_set_zero_based, k_subsets, MAX_COMPOUND_WORK};
use crate::eigen::jacobi_eigen;
use crate::error::{Error, Result};
use crate::expm::check_symmetric;
use crate::flows::{toda_solve, FlowSign};
use crate::matrix::{determinant, Matrix};
use crate::scalar::{log_sum_exp, Real};

/// Relative threshold below which a first eigenvector component counts as zero.
pub const FIRST_COMPONENT_FLOOR: f64 = 1e-13;
/// Relative gap `(λ_k − λ_{k+1}) / λ₁` below which eigenvalues are not simple.
pub const SIMPLICITY_GAP: f64 = 1e-12;
/// Default decomposition tolerance, scaled by `max|L|`.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Eigenvalues in strictly descending order and orthonormal eigenvectors
/// (columns of `phi`) with `phi[(0, k)] > 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct Spectrum<T: Real> {
    pub lambdas: Vec<T>,
    pub phi: Matrix<T>,
    /// `max|LΦ − Φ diag(λ)|`.
    pub residual: T,
}

impl<T: Real> Spectrum<T> {
    pub fn n(&self) -> usize {
        self.lambdas.len()
    }

    /// `(φ₁(1), …, φ_n(1))`.
    pub fn first_row(&self) -> Vec<T> {
        self.phi.row(0).to_vec()
    }

    /// `Φ diag(λ) Φᵀ`.
    pub fn reconstruct(&self) -> Matrix<T> {
        crate::expm::spectral_function(&self.lambdas, &self.phi, |x| x)
    }

    /// `max|ΦᵀΦ − I|`.
    pub fn orthogonality_defect(&self) -> T {
        (&self.phi.transpose() * &self.phi).max_abs_diff(&Matrix::identity(self.n()))
    }
}

/// Symmetric eigendecomposition sorted descending, columns signed so that
/// their first component is non-negative.
///
/// `tol` bounds the residual `max|LΦ − Φ diag(λ)|`; `None` uses
/// `1e−10 · max|L|`.
pub fn eigendecompose<T: Real>(l: &Matrix<T>, tol: Option<T>) -> Result<Spectrum<T>> {
    check_symmetric(l)?;
    let n = l.dim()?;
    let tol = tol.unwrap_or_else(|| T::tol(DEFAULT_TOL) * l.max_abs().max(T::min_positive_value()));
    let (vals, vecs) = jacobi_eigen(l, 100)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| vals[b].partial_cmp(&vals[a]).expect("finite eigenvalues"));
    let lambdas: Vec<T> = order.iter().map(|&k| vals[k]).collect();
    let mut phi = Matrix::from_fn(n, n, |i, j| vecs[(i, order[j])]);
    for k in 0..n {
        if phi[(0, k)] < T::zero() {
            for i in 0..n {
                phi[(i, k)] = -phi[(i, k)];
            }
        }
    }
    let lp = l * &phi;
    let mut residual = T::zero();
    for i in 0..n {
        for k in 0..n {
            residual = residual.max((lp[(i, k)] - phi[(i, k)] * lambdas[k]).abs());
        }
    }
    let spec = Spectrum { lambdas, phi, residual };
    if residual > tol || spec.orthogonality_defect() > tol.max(T::tol(1e-12)) {
        return Err(Error::NoConvergence { sweeps: 100, off: residual.as_f64() });
    }
    Ok(spec)
}

/// [`eigendecompose`] plus the Lax-operator guarantees: positive, simple
/// eigenvalues and non-vanishing first eigenvector components.
pub fn lax_spectrum<T: Real>(l: &Matrix<T>, tol: Option<T>) -> Result<Spectrum<T>> {
    let spec = eigendecompose(l, tol)?;
    let n = spec.n();
    let top = spec.lambdas[0].abs();
    for k in 0..n.saturating_sub(1) {
        let gap = spec.lambdas[k] - spec.lambdas[k + 1];
        if !(gap > T::tol(SIMPLICITY_GAP) * top) {
            return Err(Error::DegenerateSpectrum { index: k + 1, gap: gap.as_f64() });
        }
    }
    for k in 0..n {
        let c = spec.phi[(0, k)];
        if !(c.abs() > T::tol(FIRST_COMPONENT_FLOOR)) {
            return Err(Error::ZeroFirstComponent { index: k + 1, value: c.as_f64() });
        }
    }
    Ok(spec)
}

/// First eigenvector components under the (−) flow in closed form:
///
/// ```text
/// φ_k(1,t) = e^{−λ_k t/2} φ_k(1,0) / (Σ_j e^{−λ_j t} φ_j(1,0)²)^{1/2}
/// ```
///
/// evaluated in log space.
pub fn first_component_evolution<T: Real>(spec0: &Spectrum<T>, t: T) -> Vec<T> {
    let half = T::lit(0.5);
    let first = spec0.first_row();
    let w: Vec<T> = spec0
        .lambdas
        .iter()
        .zip(&first)
        .map(|(&lam, &c)| -half * lam * t + c.abs().ln())
        .collect();
    let twice: Vec<T> = w.iter().map(|&x| x + x).collect();
    let log_norm = half * log_sum_exp(&twice);
    w.iter().zip(&first).map(|(&wk, &c)| c.signum() * (wk - log_norm).exp()).collect()
}

/// `(e₁∧⋯∧e_k, φ_{i₁}∧⋯∧φ_{i_k})²`: the squared minor of Φ on rows `1..k`
/// and the given 1-based columns.
pub fn compound_projection<T: Real>(spec_t: &Spectrum<T>, k: usize, index_set: &[usize]) -> Result<T> {
    let n = spec_t.n();
    if k == 0 || k > n {
        return Err(Error::OrderOutOfRange { k, n });
    }
    let cols = index_set_zero_based(n, k, index_set)?;
    let rows: Vec<usize> = (0..k).collect();
    let d = determinant(&spec_t.phi.select(&rows, &cols))?;
    Ok(d * d)
}

/// Right side of the compound evolution law under the (+) flow,
///
/// ```text
/// e^{(λ_{i₁}+⋯+λ_{i_k})t} m_I(0)² / Σ_J e^{(λ_{j₁}+⋯+λ_{j_k})t} m_J(0)²
/// ```
///
/// for every k-subset `I` (lexicographic), with `m_I(0)` the initial minors.
pub fn compound_projection_closed_form<T: Real>(spec0: &Spectrum<T>, t: T, k: usize) -> Result<Vec<T>> {
    let n = spec0.n();
    if k == 0 || k > n {
        return Err(Error::OrderOutOfRange { k, n });
    }
    if binomial(n, k).saturating_mul(k as u128) > MAX_COMPOUND_WORK {
        return Err(Error::TooLarge { n, k });
    }
    let rows: Vec<usize> = (0..k).collect();
    let mut logw = Vec::new();
    for set in k_subsets(n, k) {
        let m = determinant(&spec0.phi.select(&rows, &set))?;
        let sum: T = set.iter().map(|&j| spec0.lambdas[j]).sum();
        logw.push(if m == T::zero() { T::neg_infinity() } else { sum * t + (m * m).ln() });
    }
    let norm = log_sum_exp(&logw);
    Ok(logw.into_iter().map(|w| (w - norm).exp()).collect())
}

/// Largest discrepancy between the closed form and the squared minors of
/// the spectrum of `L(t)` obtained from the (+) flow factorization stepper
/// started at `Φ diag(λ) Φᵀ`.
pub fn compound_evolution_check<T: Real>(spec0: &Spectrum<T>, t: T, k: usize, dt_max: T) -> Result<T> {
    let closed = compound_projection_closed_form(spec0, t, k)?;
    let l0 = spec0.reconstruct();
    let lt = toda_solve(&l0, t, FlowSign::Plus, dt_max)?;
    let spec_t = eigendecompose(&lt, None)?;
    let mut worst = T::zero();
    for (set, expected) in k_subsets(spec0.n(), k).into_iter().zip(closed) {
        let one_based: Vec<usize> = set.iter().map(|&i| i + 1).collect();
        let got = compound_projection(&spec_t, k, &one_based)?;
        worst = worst.max((got - expected).abs());
    }
    Ok(worst)
}

/// Largest relative eigenvalue change, `max_k |λ_k − μ_k| / |λ_k|`, between
/// two descending spectra.
pub fn relative_spectral_drift<T: Real>(reference: &[T], other: &[T]) -> Result<T> {
    if reference.len() != other.len() {
        return Err(Error::DimensionMismatch { expected: reference.len(), got: other.len() });
    }
    Ok(reference
        .iter()
        .zip(other)
        .map(|(&a, &b)| (a - b).abs() / a.abs().max(T::min_positive_value()))
        .fold(T::zero(), T::max))
}
