//! Peakon phase space, the semiseparable Lax operator and its tridiagonal inverse.
//!
//! A state `(q, p)` lives in a sector fixed by a strict ordering of the
//! positions. The Lax operator is
//!
//! ```text
//! L_ij = ½ exp(−|q_i − q_j|/2) √(p_i p_j)
//! ```
//!
//! and in the increasing sector `S₋` it factors as `L_ij = u_i v_j` for
//! `i ≤ j` with `u_i = e^{q_i/2} √(p_i/2)`, `v_i = e^{−q_i/2} √(p_i/2)`.
//! The decreasing sector `S₊` carries the transposed pattern; it is handled
//! by index reversal wherever the increasing orientation is required.

use serde::{Deserialize, Serialize};

use crate::algebra::{dual_project_lower, dual_project_skew};
use crate::error::{Error, Result};
use crate::flows::FactorizationPair;
use crate::matrix::{lower_triangular_inverse, Matrix};
use crate::scalar::Real;
use crate::spectral::Spectrum;

/// Gaps below this are treated as collisions by the tridiagonal inverse.
pub const MIN_GAP: f64 = 1e-12;

/// Which way the (relabeled) positions are ordered.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// `q₁ < q₂ < … < q_n`.
    Minus,
    /// `q₁ > q₂ > … > q_n`.
    Plus,
}

impl Family {
    pub fn flipped(self) -> Self {
        match self {
            Family::Minus => Family::Plus,
            Family::Plus => Family::Minus,
        }
    }
}

/// A permutation π of `{1..n}`. Stored 0-based, serialized 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Permutation(Vec<usize>);

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Self((0..n).collect())
    }

    /// From 1-based images `(π(1), …, π(n))`.
    pub fn from_one_based(images: &[usize]) -> Result<Self> {
        let n = images.len();
        if n == 0 {
            return Err(Error::InvalidPermutation("empty".into()));
        }
        let mut seen = vec![false; n];
        for &x in images {
            if x == 0 || x > n {
                return Err(Error::InvalidPermutation(format!("{images:?}: image {x} outside 1..={n}")));
            }
            if std::mem::replace(&mut seen[x - 1], true) {
                return Err(Error::InvalidPermutation(format!("{images:?}: image {x} repeated")));
            }
        }
        Ok(Self(images.iter().map(|&x| x - 1).collect()))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `π(j)`, 0-based.
    #[inline]
    pub fn apply(&self, j: usize) -> usize {
        self.0[j]
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.0.len()];
        for (j, &pj) in self.0.iter().enumerate() {
            inv[pj] = j;
        }
        Self(inv)
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(j, &pj)| j == pj)
    }

    pub fn one_based(&self) -> Vec<usize> {
        self.0.iter().map(|&x| x + 1).collect()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    /// `(x_{π(1)}, …, x_{π(n)})`.
    pub fn gather<T: Copy>(&self, x: &[T]) -> Vec<T> {
        self.0.iter().map(|&i| x[i]).collect()
    }

    /// Inverse of [`Permutation::gather`].
    pub fn scatter<T: Copy + Default>(&self, y: &[T]) -> Vec<T> {
        let mut x = vec![T::default(); y.len()];
        for (j, &i) in self.0.iter().enumerate() {
            x[i] = y[j];
        }
        x
    }
}

impl TryFrom<Vec<usize>> for Permutation {
    type Error = Error;
    fn try_from(v: Vec<usize>) -> Result<Self> {
        Self::from_one_based(&v)
    }
}

impl From<Permutation> for Vec<usize> {
    fn from(p: Permutation) -> Self {
        p.one_based()
    }
}

/// Phase-space sector.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "tag", rename_all = "snake_case")]
pub enum Sector {
    Minus,
    Plus,
    /// `q_{π(1)} < q_{π(2)} < …`
    MinusPerm { permutation: Permutation },
    /// `q_{π(1)} > q_{π(2)} > …`
    PlusPerm { permutation: Permutation },
}

impl Sector {
    pub fn family(&self) -> Family {
        match self {
            Sector::Minus | Sector::MinusPerm { .. } => Family::Minus,
            Sector::Plus | Sector::PlusPerm { .. } => Family::Plus,
        }
    }

    pub fn permutation(&self) -> Option<&Permutation> {
        match self {
            Sector::MinusPerm { permutation } | Sector::PlusPerm { permutation } => Some(permutation),
            _ => None,
        }
    }

    /// The unpermuted sector of the same family.
    pub fn base(&self) -> Sector {
        match self.family() {
            Family::Minus => Sector::Minus,
            Family::Plus => Sector::Plus,
        }
    }

    pub fn with_permutation(family: Family, permutation: Option<Permutation>) -> Sector {
        match (family, permutation) {
            (Family::Minus, None) => Sector::Minus,
            (Family::Plus, None) => Sector::Plus,
            (Family::Minus, Some(permutation)) => Sector::MinusPerm { permutation },
            (Family::Plus, Some(permutation)) => Sector::PlusPerm { permutation },
        }
    }

    /// Visiting order of the indices (0-based) along which positions are monotone.
    pub fn order(&self, n: usize) -> Vec<usize> {
        match self.permutation() {
            Some(p) => p.as_slice().to_vec(),
            None => (0..n).collect(),
        }
    }

    /// Short label: `minus`, `plus`, `minus_perm`, `plus_perm`.
    pub fn label(&self) -> &'static str {
        match self {
            Sector::Minus => "minus",
            Sector::Plus => "plus",
            Sector::MinusPerm { .. } => "minus_perm",
            Sector::PlusPerm { .. } => "plus_perm",
        }
    }

    /// Sector implied by strictly ordered positions: `Minus`, `Plus`, or
    /// `PlusPerm` with π sorting the positions decreasingly. `None` on ties.
    pub fn infer<T: Real>(q: &[T]) -> Option<Sector> {
        let n = q.len();
        if n == 0 || q.iter().any(|x| !x.is_finite()) {
            return None;
        }
        if q.windows(2).all(|w| w[0] < w[1]) {
            return Some(Sector::Minus);
        }
        if q.windows(2).all(|w| w[0] > w[1]) {
            return Some(Sector::Plus);
        }
        let mut idx: Vec<usize> = (0..n).collect();
        idx.sort_by(|&a, &b| q[b].partial_cmp(&q[a]).expect("finite"));
        if idx.windows(2).any(|w| q[w[0]] == q[w[1]]) {
            return None;
        }
        Some(Sector::PlusPerm { permutation: Permutation(idx) })
    }
}

/// A point `(q, p)` of the truncated peakon phase space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct PeakonState<T: Real> {
    pub q: Vec<T>,
    pub p: Vec<T>,
    pub sector: Sector,
}

impl<T: Real> PeakonState<T> {
    /// Validates positivity, finiteness and strict sector ordering.
    pub fn new(q: Vec<T>, p: Vec<T>, sector: Sector) -> Result<Self> {
        let s = Self { q, p, sector };
        s.validate()?;
        Ok(s)
    }

    pub fn from_f64(q: &[f64], p: &[f64], sector: Sector) -> Result<Self> {
        Self::new(q.iter().map(|&x| T::lit(x)).collect(), p.iter().map(|&x| T::lit(x)).collect(), sector)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.q.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.q.len();
        if n == 0 {
            return Err(Error::InvalidState("truncation size must be at least 1".into()));
        }
        if self.p.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: self.p.len() });
        }
        if self.q.iter().chain(&self.p).any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("state"));
        }
        if let Some((j, &v)) = self.p.iter().enumerate().find(|(_, &v)| v <= T::zero()) {
            return Err(Error::NonPositiveMomentum { index: j + 1, value: v.as_f64() });
        }
        if let Some(perm) = self.sector.permutation() {
            if perm.len() != n {
                return Err(Error::InvalidPermutation(format!("length {} for n = {n}", perm.len())));
            }
        }
        self.check_ordering(T::zero())
    }

    /// Strict ordering with the sector, consecutive gaps larger than `min_gap`.
    pub fn check_ordering(&self, min_gap: T) -> Result<()> {
        let order = self.sector.order(self.n());
        let family = self.sector.family();
        for w in order.windows(2) {
            let (a, b) = (w[0], w[1]);
            let gap = match family {
                Family::Minus => self.q[b] - self.q[a],
                Family::Plus => self.q[a] - self.q[b],
            };
            if !(gap > min_gap) {
                let rel = if family == Family::Minus { "<" } else { ">" };
                return Err(Error::SectorViolation {
                    index: b + 1,
                    detail: format!(
                        "need q_{} {rel} q_{} with gap above {:e}, have {} and {}",
                        a + 1,
                        b + 1,
                        min_gap.as_f64(),
                        self.q[a],
                        self.q[b]
                    ),
                });
            }
        }
        Ok(())
    }

    /// `(π·q, π·p)` in the unpermuted sector of the same family.
    pub fn relabeled(&self) -> Self {
        match self.sector.permutation() {
            None => self.clone(),
            Some(perm) => Self { q: perm.gather(&self.q), p: perm.gather(&self.p), sector: self.sector.base() },
        }
    }

    /// Inverse of [`PeakonState::relabeled`] for a base-sector state.
    pub fn unrelabeled(&self, sector: &Sector) -> Self {
        match sector.permutation() {
            None => Self { sector: sector.clone(), ..self.clone() },
            Some(perm) => Self { q: perm.scatter(&self.q), p: perm.scatter(&self.p), sector: sector.clone() },
        }
    }

    /// Index reversal `j ↦ n+1−j` of a base-sector state; swaps `S₊` and `S₋`.
    pub fn reversed(&self) -> Self {
        let mut q = self.q.clone();
        let mut p = self.p.clone();
        q.reverse();
        p.reverse();
        Self { q, p, sector: self.sector.base().flip_base() }
    }

    /// Total momentum `P = Σ p_j`.
    pub fn total_momentum(&self) -> T {
        self.p.iter().copied().sum()
    }

    /// Hamiltonian `H = ¼ Σ_{i,j} e^{−|q_i−q_j|} p_i p_j`.
    pub fn hamiltonian(&self) -> T {
        let n = self.n();
        let quarter = T::lit(0.25);
        let mut h = T::zero();
        for i in 0..n {
            h += quarter * self.p[i] * self.p[i];
            for j in (i + 1)..n {
                h += T::lit(0.5) * (-(self.q[i] - self.q[j]).abs()).exp() * self.p[i] * self.p[j];
            }
        }
        h
    }

    /// Smallest pairwise distance; `None` for a single peak.
    pub fn min_gap(&self) -> Option<T> {
        let mut sorted = self.q.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
        sorted.windows(2).map(|w| w[1] - w[0]).reduce(T::min)
    }

    pub fn max_abs_q(&self) -> T {
        self.q.iter().fold(T::zero(), |m, &x| m.max(x.abs()))
    }

    /// Shifts every position by `c`.
    pub fn translated(&self, c: T) -> Self {
        Self { q: self.q.iter().map(|&x| x + c).collect(), ..self.clone() }
    }
}

impl Sector {
    fn flip_base(&self) -> Sector {
        match self {
            Sector::Minus => Sector::Plus,
            Sector::Plus => Sector::Minus,
            other => other.clone(),
        }
    }
}

/// `L(q, p)` together with its semiseparable factors.
#[derive(Debug, Clone, PartialEq)]
pub struct LaxOperator<T: Real> {
    pub matrix: Matrix<T>,
    /// Factors in the gauge where positions are measured from `gauge`.
    pub u: Vec<T>,
    pub v: Vec<T>,
    pub gauge: T,
    /// Relabeled state the matrix was built from.
    pub state: PeakonState<T>,
}

impl<T: Real> LaxOperator<T> {
    pub fn n(&self) -> usize {
        self.u.len()
    }

    pub fn family(&self) -> Family {
        self.state.sector.family()
    }

    /// Leading-minor determinants `det L⁽ᵏ⁾`, k = 1..n, from the product formula
    ///
    /// ```text
    /// det L⁽ᵏ⁾ = v₁²⋯v_k² Π_{j≤k} (u_j/v_j − u_{j−1}/v_{j−1}),   u₀/v₀ = 0
    /// ```
    ///
    /// Since `v_j² u_j/v_j = p_j/2` each factor is `(p_j/2)(1 − e^{−(q_j − q_{j−1})})`,
    /// which is how it is evaluated. Requires the increasing orientation.
    pub fn leading_minor_dets(&self) -> Result<Vec<T>> {
        if self.family() != Family::Minus {
            return Err(Error::OrientationMismatch(
                "leading minors use the S- factor orientation; relabel S+ states by index reversal first".into(),
            ));
        }
        let q = &self.state.q;
        let p = &self.state.p;
        let half = T::lit(0.5);
        let mut acc = T::one();
        let mut out = Vec::with_capacity(q.len());
        for j in 0..q.len() {
            let factor = if j == 0 { half * p[0] } else { half * p[j] * -(-(q[j] - q[j - 1])).exp_m1() };
            acc *= factor;
            out.push(acc);
        }
        Ok(out)
    }
}

/// Builds `L(q, p)`. Permuted sectors use the relabeled state `(π·q, π·p)`.
pub fn lax_from_state<T: Real>(s: &PeakonState<T>) -> Result<LaxOperator<T>> {
    s.validate()?;
    let state = s.relabeled();
    let n = state.n();
    let half = T::lit(0.5);
    let (q, p) = (&state.q, &state.p);
    let sqrt_p: Vec<T> = p.iter().map(|x| x.sqrt()).collect();
    let matrix = Matrix::from_fn(n, n, |i, j| {
        if i == j {
            half * p[i]
        } else {
            half * (-half * (q[i] - q[j]).abs()).exp() * sqrt_p[i] * sqrt_p[j]
        }
    });
    let lo = q.iter().copied().fold(T::infinity(), T::min);
    let hi = q.iter().copied().fold(T::neg_infinity(), T::max);
    let gauge = half * (lo + hi);
    let root_half = half.sqrt();
    let u = (0..n).map(|i| root_half * (half * (q[i] - gauge)).exp() * sqrt_p[i]).collect();
    let v = (0..n).map(|i| root_half * (-half * (q[i] - gauge)).exp() * sqrt_p[i]).collect();
    Ok(LaxOperator { matrix, u, v, gauge, state })
}

/// Tridiagonal `J = L⁻¹` of an increasing-sector state.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalInverse<T: Real> {
    /// Diagonal `a₁..a_n`.
    pub a: Vec<T>,
    /// Off-diagonal magnitudes `b₁..b_{n−1}`; `J` carries `−b_j`.
    pub b: Vec<T>,
    /// Gap factors `e_j = e^{−(q_{j+1}−q_j)/2}`, j = 1..n−1.
    pub e: Vec<T>,
}

impl<T: Real> TridiagonalInverse<T> {
    pub fn to_matrix(&self) -> Matrix<T> {
        let n = self.a.len();
        Matrix::from_fn(n, n, |i, j| {
            if i == j {
                self.a[i]
            } else if i + 1 == j {
                -self.b[i]
            } else if j + 1 == i {
                -self.b[j]
            } else {
                T::zero()
            }
        })
    }
}

/// Entries of the tridiagonal inverse
///
/// ```text
/// a_j = (2/p_j) (1 − e²_{j−1} e²_j) / ((1 − e²_{j−1})(1 − e²_j))
/// b_j = 2 e_j / (√(p_j p_{j+1}) (1 − e²_j))
/// ```
///
/// with boundary `e₀ = e_n = 0`, which makes `J` the exact inverse of the
/// n×n truncation.
pub fn tridiagonal_inverse<T: Real>(s: &PeakonState<T>) -> Result<TridiagonalInverse<T>> {
    s.validate()?;
    if s.sector.family() != Family::Minus {
        return Err(Error::SectorMismatch("tridiagonal inverse needs an S- (increasing) state".into()));
    }
    let s = s.relabeled();
    let n = s.n();
    let two = T::lit(2.0);
    let mut e = Vec::with_capacity(n.saturating_sub(1));
    // 1 − e_j², evaluated as −expm1(−gap) to keep precision for small gaps
    let mut one_minus_e2 = Vec::with_capacity(n.saturating_sub(1));
    for j in 0..n.saturating_sub(1) {
        let gap = s.q[j + 1] - s.q[j];
        if gap < T::lit(MIN_GAP) {
            return Err(Error::NearSingular(format!(
                "gap q_{} - q_{} = {:e} is below {MIN_GAP:e}",
                j + 2,
                j + 1,
                gap.as_f64()
            )));
        }
        e.push((-T::lit(0.5) * gap).exp());
        one_minus_e2.push(-(-gap).exp_m1());
    }
    let e2 = |j: usize| -> T {
        // 1-based gap index with e_0 = e_n = 0
        if j == 0 || j >= n {
            T::zero()
        } else {
            e[j - 1] * e[j - 1]
        }
    };
    let ome2 = |j: usize| -> T {
        if j == 0 || j >= n {
            T::one()
        } else {
            one_minus_e2[j - 1]
        }
    };
    let a = (1..=n)
        .map(|j| two / s.p[j - 1] * (T::one() - e2(j - 1) * e2(j)) / (ome2(j - 1) * ome2(j)))
        .collect();
    let b = (1..n).map(|j| two * e[j - 1] / ((s.p[j - 1] * s.p[j]).sqrt() * ome2(j))).collect();
    Ok(TridiagonalInverse { a, b, e })
}

/// Largest residual of the three-term recurrence
///
/// ```text
/// b_j φ_k(j+1) = −b_{j−1} φ_k(j−1) + (a_j − 1/λ_k) φ_k(j),   j = 1..n−1
/// ```
///
/// over all eigenpairs of `spec`. Zero (vacuous) for `n = 1`.
pub fn recurrence_residual<T: Real>(s: &PeakonState<T>, spec: &Spectrum<T>) -> Result<T> {
    let n = s.n();
    if spec.n() != n {
        return Err(Error::DimensionMismatch { expected: n, got: spec.n() });
    }
    let j_inv = tridiagonal_inverse(s)?;
    let mut worst = T::zero();
    for k in 0..n {
        let phi = spec.phi.column(k);
        let inv_lambda = T::one() / spec.lambdas[k];
        for j in 0..n.saturating_sub(1) {
            let lhs = j_inv.b[j] * phi[j + 1];
            let prev = if j == 0 { T::zero() } else { j_inv.b[j - 1] * phi[j - 1] };
            let rhs = -prev + (j_inv.a[j] - inv_lambda) * phi[j];
            worst = worst.max((lhs - rhs).abs());
        }
    }
    Ok(worst)
}

/// Membership test for symmetric semiseparable matrices: every 2×2 minor
/// `M_ij M_i'j' − M_ij' M_i'j` with `i < i' ≤ j < j'` (all four entries on or
/// above the diagonal) must vanish to `tol · max|M|²`.
pub fn is_semiseparable<T: Real>(m: &Matrix<T>, tol: T) -> bool {
    let Ok(n) = m.dim() else { return false };
    let scale = m.max_abs();
    if scale == T::zero() {
        return true;
    }
    let bound = tol * scale * scale;
    for i in 0..n {
        for i2 in (i + 1)..n {
            for j in i2..n {
                for j2 in (j + 1)..n {
                    let minor = m[(i, j)] * m[(i2, j2)] - m[(i, j2)] * m[(i2, j)];
                    if !(minor.abs() <= bound) {
                        return false;
                    }
                }
            }
        }
    }
    true
}

/// Coadjoint action `Π*_𝔩(b₋ L b₋⁻¹) + Π*_𝔨(b₊ L b₊⁻¹)`.
pub fn coadjoint_action<T: Real>(g: &FactorizationPair<T>, l: &Matrix<T>) -> Result<Matrix<T>> {
    let n = l.dim()?;
    for m in [&g.b_minus, &g.b_plus] {
        if m.rows() != n || m.cols() != n {
            return Err(Error::DimensionMismatch { expected: n, got: m.rows() });
        }
    }
    let b_minus_inv = lower_triangular_inverse(&g.b_minus)?;
    let lower_part = &(&g.b_minus * l) * &b_minus_inv;
    let skew_part = &(&g.b_plus * l) * &g.b_plus.transpose();
    Ok(&dual_project_lower(&lower_part)? + &dual_project_skew(&skew_part)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_peak() -> PeakonState<f64> {
        PeakonState::from_f64(&[-1.0, 1.0], &[1.0, 1.0], Sector::Minus).unwrap()
    }

    #[test]
    fn single_peak_lax() {
        let s = PeakonState::<f64>::from_f64(&[0.0], &[2.0], Sector::Minus).unwrap();
        let l = lax_from_state(&s).unwrap();
        assert_eq!(l.matrix, Matrix::from_f64_rows(&[&[1.0]]));
        assert_eq!(l.leading_minor_dets().unwrap(), vec![1.0]);
        let j = tridiagonal_inverse(&s).unwrap();
        assert_eq!(j.a, vec![1.0]);
        assert!(j.b.is_empty());
    }

    #[test]
    fn two_peak_lax_entries() {
        let l = lax_from_state(&two_peak()).unwrap();
        let e1 = (-1.0f64).exp();
        assert_eq!(l.matrix[(0, 0)], 0.5);
        assert!((l.matrix[(0, 1)] - 0.5 * e1).abs() < 1e-16);
        assert_eq!(l.matrix[(0, 1)], l.matrix[(1, 0)]);
        assert!((l.matrix.trace() - 1.0).abs() < 1e-16);
    }

    #[test]
    fn two_peak_minor_and_inverse() {
        let s = two_peak();
        let dets = lax_from_state(&s).unwrap().leading_minor_dets().unwrap();
        let e2 = (-2.0f64).exp();
        assert!((dets[1] - (1.0 - e2) / 4.0).abs() < 1e-15);
        assert!((dets[1] - 0.2161661).abs() < 1e-6);
        let j = tridiagonal_inverse(&s).unwrap();
        let a = 2.0 / (1.0 - e2);
        let b = 2.0 * (-1.0f64).exp() / (1.0 - e2);
        assert!((j.a[0] - a).abs() < 1e-14 && (j.a[1] - a).abs() < 1e-14);
        assert!((j.b[0] - b).abs() < 1e-14);
        assert!((a - 2.3130353).abs() < 1e-7);
        assert!((b - 0.8509181).abs() < 1e-7);
    }

    #[test]
    fn semiseparable_factors_reproduce_upper_triangle() {
        let s = PeakonState::<f64>::from_f64(&[-0.3, 0.4, 2.0], &[0.7, 1.3, 0.2], Sector::Minus).unwrap();
        let l = lax_from_state(&s).unwrap();
        for i in 0..3 {
            for j in i..3 {
                assert!((l.u[i] * l.v[j] - l.matrix[(i, j)]).abs() < 1e-15);
            }
        }
        let m = &l.matrix;
        assert!((m[(0, 2)] * m[(1, 1)] - m[(0, 1)] * m[(1, 2)]).abs() < 1e-12);
        assert!(is_semiseparable(m, 1e-12));
        // u_j / v_j = e^{q_j - gauge} increases along S-
        let ratios: Vec<f64> = l.u.iter().zip(&l.v).map(|(u, v)| u / v).collect();
        assert!(ratios.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn plus_sector_has_transposed_pattern() {
        let s = PeakonState::<f64>::from_f64(&[2.0, 0.4, -0.3], &[0.7, 1.3, 0.2], Sector::Plus).unwrap();
        let l = lax_from_state(&s).unwrap();
        for i in 0..3 {
            for j in i..3 {
                assert!((l.u[j] * l.v[i] - l.matrix[(i, j)]).abs() < 1e-15);
            }
        }
        assert!(matches!(l.leading_minor_dets(), Err(Error::OrientationMismatch(_))));
        assert!(matches!(tridiagonal_inverse(&s), Err(Error::SectorMismatch(_))));
        let rev = s.reversed();
        assert_eq!(rev.sector, Sector::Minus);
        assert_eq!(rev.q, vec![-0.3, 0.4, 2.0]);
    }

    #[test]
    fn state_validation() {
        assert!(matches!(
            PeakonState::<f64>::from_f64(&[0.0, 1.0], &[1.0, -1.0], Sector::Minus),
            Err(Error::NonPositiveMomentum { index: 2, .. })
        ));
        assert!(matches!(
            PeakonState::<f64>::from_f64(&[0.0, 1.0], &[1.0, 1.0], Sector::Plus),
            Err(Error::SectorViolation { .. })
        ));
        assert!(matches!(
            PeakonState::<f64>::from_f64(&[0.0, 0.0], &[1.0, 1.0], Sector::Minus),
            Err(Error::SectorViolation { .. })
        ));
        assert!(PeakonState::<f64>::from_f64(&[0.0], &[1.0, 1.0], Sector::Minus).is_err());
        assert!(PeakonState::<f64>::from_f64(&[f64::NAN], &[1.0], Sector::Minus).is_err());
        let pi = Permutation::from_one_based(&[2, 3, 1]).unwrap();
        // q_2 > q_3 > q_1
        let s = PeakonState::<f64>::from_f64(&[0.0, 5.0, 3.0], &[1.0, 2.0, 3.0], Sector::PlusPerm { permutation: pi.clone() })
            .unwrap();
        let r = s.relabeled();
        assert_eq!(r.q, vec![5.0, 3.0, 0.0]);
        assert_eq!(r.p, vec![2.0, 3.0, 1.0]);
        assert_eq!(r.unrelabeled(&s.sector), s);
        assert!(PeakonState::<f64>::from_f64(&[0.0, 3.0, 5.0], &[1.0, 2.0, 3.0], Sector::PlusPerm { permutation: pi })
            .is_err());
    }

    #[test]
    fn permutation_parsing() {
        assert!(Permutation::from_one_based(&[1, 1]).is_err());
        assert!(Permutation::from_one_based(&[0, 1]).is_err());
        assert!(Permutation::from_one_based(&[]).is_err());
        let p = Permutation::from_one_based(&[3, 1, 2]).unwrap();
        assert_eq!(p.inverse().one_based(), vec![2, 3, 1]);
        let json = serde_json::to_string(&Sector::PlusPerm { permutation: p.clone() }).unwrap();
        assert_eq!(json, r#"{"tag":"plus_perm","permutation":[3,1,2]}"#);
        let back: Sector = serde_json::from_str(&json).unwrap();
        assert_eq!(back.permutation(), Some(&p));
        assert!(serde_json::from_str::<Sector>(r#"{"tag":"plus_perm","permutation":[3,3,2]}"#).is_err());
    }

    #[test]
    fn infer_sector() {
        assert_eq!(Sector::infer(&[0.0, 1.0]), Some(Sector::Minus));
        assert_eq!(Sector::infer(&[1.0, 0.0]), Some(Sector::Plus));
        let s = Sector::infer(&[0.0, 5.0, 3.0]).unwrap();
        assert_eq!(s.permutation().unwrap().one_based(), vec![2, 3, 1]);
        assert_eq!(Sector::infer(&[0.0, 1.0, 0.0]), None);
    }

    #[test]
    fn semiseparability_counterexample() {
        let mut m = Matrix::<f64>::identity(4);
        m[(0, 3)] = 1.0;
        m[(3, 0)] = 1.0;
        assert!(!is_semiseparable(&m, 1e-9));
        let w = [1.0, -2.0, 0.5, 3.0];
        let r1 = Matrix::from_fn(4, 4, |i, j| w[i] * w[j]);
        assert!(is_semiseparable(&r1, 1e-12));
    }

    #[test]
    fn near_singular_gap() {
        let s = PeakonState::<f64>::from_f64(&[0.0, 1e-13], &[1.0, 1.0], Sector::Minus).unwrap();
        assert!(matches!(tridiagonal_inverse(&s), Err(Error::NearSingular(_))));
    }

    #[test]
    fn identity_coadjoint_action() {
        let l = lax_from_state(&two_peak()).unwrap().matrix;
        let g = FactorizationPair { b_minus: Matrix::identity(2), b_plus: Matrix::identity(2) };
        assert!(coadjoint_action(&g, &l).unwrap().max_abs_diff(&l) < 1e-16);
        let d = Matrix::<f64>::from_diag(&[1.0, 2.0, 3.0]);
        let g = FactorizationPair { b_minus: Matrix::from_diag(&[2.0, 0.5, 4.0]), b_plus: Matrix::identity(3) };
        assert!(coadjoint_action(&g, &d).unwrap().max_abs_diff(&d) < 1e-15);
    }
}
