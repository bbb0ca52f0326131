//! Time evolution by two independent routes.
//!
//! * [`integrate`]: adaptive Runge–Kutta on the peakon equations
//!   ```text
//!   q̇_j = ½ Σ_k e^{−|q_j−q_k|} p_k
//!   ṗ_j = ½ p_j Σ_k sgn(q_j−q_k) e^{−|q_j−q_k|} p_k      (sgn 0 = 0)
//!   ```
//! * [`toda_solve`]: the factorization solution of `L̇ = ±½[Π_𝔨 L, L]`.
//!   Factor `exp(±½ t L₀) = b₋ b₊⁻¹` with `b₋` lower triangular with positive
//!   diagonal and `b₊` orthogonal; then `L(t) = b₊ᵀ L₀ b₊`.
//!
//! `S₋` states evolve under the (−) flow and `S₊` states under the (+) flow.

use serde::{Deserialize, Serialize};

use crate::eigen::jacobi_eigen;
use crate::error::{Error, Result};
use crate::expm::{check_symmetric, spectral_function};
use crate::lax::{lax_from_state, Family, PeakonState, Sector};
use crate::matrix::Matrix;
use crate::ode::{dopri5, IntegratorConfig, StepStats};
use crate::scalar::Real;

/// Positions closer than this are a collision.
pub const COLLISION_GAP: f64 = 1e-10;
/// Bound on `|dt| · λ_max` for a single factorization step.
pub const OVERFLOW_GUARD: f64 = 50.0;
/// Default substep for [`toda_solve`].
pub const DEFAULT_DT_MAX: f64 = 0.5;

/// Sign of the Toda flow `L̇ = ±½[Π_𝔨 L, L]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlowSign {
    Plus,
    Minus,
}

impl FlowSign {
    fn value<T: Real>(self) -> T {
        match self {
            FlowSign::Plus => T::one(),
            FlowSign::Minus => -T::one(),
        }
    }
}

impl From<Family> for FlowSign {
    fn from(f: Family) -> Self {
        match f {
            Family::Plus => FlowSign::Plus,
            Family::Minus => FlowSign::Minus,
        }
    }
}

impl Sector {
    /// The Toda flow a sector evolves under.
    pub fn flow_sign(&self) -> FlowSign {
        self.family().into()
    }
}

/// `G = b₋ b₊⁻¹`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct FactorizationPair<T: Real> {
    /// Lower triangular, positive diagonal.
    pub b_minus: Matrix<T>,
    /// Orthogonal.
    pub b_plus: Matrix<T>,
}

impl<T: Real> FactorizationPair<T> {
    /// `b₋ b₊⁻¹ = b₋ b₊ᵀ`.
    pub fn product(&self) -> Matrix<T> {
        &self.b_minus * &self.b_plus.transpose()
    }
}

/// Factors `G = b₋ b₊⁻¹` by Gram–Schmidt on the columns of `Gᵀ`
/// (reorthogonalized once), so that `Gᵀ = b₊ b₋ᵀ`.
pub fn factorize<T: Real>(g: &Matrix<T>) -> Result<FactorizationPair<T>> {
    let n = g.dim()?;
    if !g.all_finite() {
        return Err(Error::NonFinite("factorization input"));
    }
    let scale = g.frobenius();
    let floor = T::tol(1e-13) * scale;
    // columns of Gᵀ are rows of G
    let mut q: Vec<Vec<T>> = Vec::with_capacity(n);
    let mut r = Matrix::zeros(n, n);
    for i in 0..n {
        let mut w = g.row(i).to_vec();
        for _pass in 0..2 {
            for (k, qk) in q.iter().enumerate() {
                let c: T = qk.iter().zip(&w).map(|(&a, &b)| a * b).sum();
                r[(k, i)] += c;
                for (wj, &qj) in w.iter_mut().zip(qk) {
                    *wj -= c * qj;
                }
            }
        }
        let norm = w.iter().map(|&x| x * x).sum::<T>().sqrt();
        if !(norm > floor) {
            return Err(Error::RankDeficient { index: i + 1, value: norm.as_f64() });
        }
        r[(i, i)] = norm;
        q.push(w.into_iter().map(|x| x / norm).collect());
    }
    let b_plus = Matrix::from_fn(n, n, |i, j| q[j][i]);
    Ok(FactorizationPair { b_minus: r.transpose(), b_plus })
}

/// One factorization step of length `dt`: returns `b₊ᵀ L b₊` where
/// `exp(±½ dt L) = b₋ b₊⁻¹`.
pub fn toda_step<T: Real>(l: &Matrix<T>, dt: T, sign: FlowSign) -> Result<Matrix<T>> {
    check_symmetric(l)?;
    if dt == T::zero() {
        return Ok(l.clone());
    }
    let (vals, v) = jacobi_eigen(l, 100)?;
    let lambda_max = vals.iter().fold(T::zero(), |m, &x| m.max(x.abs()));
    let load = dt.abs() * lambda_max;
    if load > T::lit(OVERFLOW_GUARD) {
        return Err(Error::OverflowGuard(load.as_f64()));
    }
    let exponent = T::lit(0.5) * sign.value::<T>() * dt;
    let g = spectral_function(&vals, &v, |x| (exponent * x).exp());
    let pair = factorize(&g)?;
    let bp = &pair.b_plus;
    Ok((&(&bp.transpose() * l) * bp).symmetrized())
}

/// Composes [`toda_step`] over `m` uniform substeps, `m` large enough that
/// each has length at most `dt_max` and stays under the overflow guard.
pub fn toda_solve<T: Real>(l0: &Matrix<T>, t: T, sign: FlowSign, dt_max: T) -> Result<Matrix<T>> {
    check_symmetric(l0)?;
    if t == T::zero() {
        return Ok(l0.clone());
    }
    if !(dt_max > T::zero()) {
        return Err(Error::Config("dt_max must be positive".into()));
    }
    let steps = substeps(l0, t, dt_max);
    let h = t / T::from_usize(steps).expect("step count");
    let mut l = l0.clone();
    for _ in 0..steps {
        l = toda_step(&l, h, sign)?;
    }
    Ok(l)
}

fn substeps<T: Real>(l0: &Matrix<T>, t: T, dt_max: T) -> usize {
    // Gershgorin bound on the spectral radius; conserved along the flow
    let n = l0.rows();
    let radius = (0..n)
        .map(|i| l0.row(i).iter().map(|x| x.abs()).sum::<T>())
        .fold(T::zero(), T::max);
    let by_dt = (t.abs() / dt_max).ceil();
    let by_guard = (t.abs() * radius / T::lit(0.9 * OVERFLOW_GUARD)).ceil();
    by_dt.max(by_guard).max(T::one()).to_usize().unwrap_or(1)
}

/// Recovers `(q, p)` from a Lax matrix: `p_j = 2 L_jj` and consecutive gaps
/// `−2 ln(L_{j,j+1} / √(L_jj L_{j+1,j+1}))`. The first relabeled position
/// (`q₁`, or `q_{π(1)}` for permuted sectors) is set to `q_ref`.
pub fn lax_to_state<T: Real>(l: &Matrix<T>, q_ref: T, sector: &Sector) -> Result<PeakonState<T>> {
    let n = l.dim()?;
    let two = T::lit(2.0);
    let p: Vec<T> = l.diagonal().into_iter().map(|d| two * d).collect();
    if let Some((j, &v)) = p.iter().enumerate().find(|(_, &v)| !(v > T::zero())) {
        return Err(Error::NonPositiveMomentum { index: j + 1, value: v.as_f64() });
    }
    let mut q = Vec::with_capacity(n);
    q.push(q_ref);
    for j in 0..n.saturating_sub(1) {
        let ratio = l[(j, j + 1)] / (l[(j, j)] * l[(j + 1, j + 1)]).sqrt();
        if !(ratio > T::zero() && ratio < T::one()) {
            return Err(Error::NoRealGap { i: j + 1, j: j + 2, ratio: ratio.as_f64() });
        }
        let gap = -two * ratio.ln();
        let last = q[j];
        q.push(match sector.family() {
            Family::Minus => last + gap,
            Family::Plus => last - gap,
        });
    }
    let base = PeakonState::new(q, p, sector.base())?;
    let state = base.unrelabeled(sector);
    state.validate()?;
    Ok(state)
}

/// Right side of the peakon equations. Panics on length mismatch.
pub fn peakon_rhs<T: Real>(q: &[T], p: &[T], dq: &mut [T], dp: &mut [T]) {
    let n = q.len();
    let half = T::lit(0.5);
    for j in 0..n {
        dq[j] = half * p[j];
        dp[j] = T::zero();
    }
    for j in 0..n {
        for k in (j + 1)..n {
            let d = q[j] - q[k];
            let w = (-d.abs()).exp();
            dq[j] += half * w * p[k];
            dq[k] += half * w * p[j];
            // antisymmetric pair term, so Σ dp cancels pairwise
            let pair = half * p[j] * p[k] * d.sgn0() * w;
            dp[j] += pair;
            dp[k] -= pair;
        }
    }
}

/// `(q̇, ṗ)` at a validated state.
pub fn rhs<T: Real>(s: &PeakonState<T>) -> Result<(Vec<T>, Vec<T>)> {
    s.validate()?;
    let n = s.n();
    let mut dq = vec![T::zero(); n];
    let mut dp = vec![T::zero(); n];
    peakon_rhs(&s.q, &s.p, &mut dq, &mut dp);
    Ok((dq, dp))
}

/// Conserved quantities at one time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct LedgerEntry<T: Real> {
    /// `P = Σ p_j`.
    pub total_momentum: T,
    /// `H = ¼ Σ_{i,j} e^{−|q_i−q_j|} p_i p_j`.
    pub hamiltonian: T,
    /// `tr L`, `tr L²`, `tr L³`.
    pub traces: [T; 3],
}

impl<T: Real> LedgerEntry<T> {
    pub fn of(s: &PeakonState<T>) -> Result<Self> {
        let l = lax_from_state(s)?.matrix;
        let l2 = &l * &l;
        let mut tr3 = T::zero();
        let n = s.n();
        for i in 0..n {
            for j in 0..n {
                tr3 += l2[(i, j)] * l[(j, i)];
            }
        }
        Ok(Self {
            total_momentum: s.total_momentum(),
            hamiltonian: s.hamiltonian(),
            traces: [l.trace(), l2.trace(), tr3],
        })
    }

    fn values(&self) -> [T; 5] {
        [self.total_momentum, self.hamiltonian, self.traces[0], self.traces[1], self.traces[2]]
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub steps: StepStats,
    /// Smallest consecutive gap seen at any accepted step.
    pub min_gap: Option<f64>,
}

/// Recorded states of an integration, with their conserved-quantity ledger.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct Trajectory<T: Real> {
    pub times: Vec<T>,
    pub states: Vec<PeakonState<T>>,
    pub ledger: Vec<LedgerEntry<T>>,
    pub diagnostics: Diagnostics,
}

impl<T: Real> Trajectory<T> {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn n(&self) -> usize {
        self.states.first().map_or(0, PeakonState::n)
    }

    pub fn sector(&self) -> Option<&Sector> {
        self.states.first().map(|s| &s.sector)
    }

    pub fn initial(&self) -> &PeakonState<T> {
        &self.states[0]
    }

    pub fn last(&self) -> &PeakonState<T> {
        self.states.last().expect("non-empty trajectory")
    }

    pub fn t_end(&self) -> T {
        *self.times.last().expect("non-empty trajectory")
    }

    /// Cubic Hermite interpolation of `(q, p)` between recorded states using
    /// the equations of motion for the node derivatives.
    pub fn state_at(&self, t: T) -> Result<PeakonState<T>> {
        let (start, end) = (self.times[0], self.t_end());
        if !(t >= start && t <= end) {
            return Err(Error::TimeOutOfRange { t: t.as_f64(), start: start.as_f64(), end: end.as_f64() });
        }
        let idx = self.times.partition_point(|&x| x <= t);
        if idx == 0 {
            return Ok(self.states[0].clone());
        }
        let i = idx - 1;
        if self.times[i] == t || i + 1 == self.times.len() {
            return Ok(self.states[i].clone());
        }
        let (t0, t1) = (self.times[i], self.times[i + 1]);
        let (s0, s1) = (&self.states[i], &self.states[i + 1]);
        let (dq0, dp0) = rhs(s0)?;
        let (dq1, dp1) = rhs(s1)?;
        let h = t1 - t0;
        let x = (t - t0) / h;
        let one = T::one();
        let two = T::lit(2.0);
        let three = T::lit(3.0);
        let h00 = (one + two * x) * (one - x) * (one - x);
        let h10 = x * (one - x) * (one - x);
        let h01 = x * x * (three - two * x);
        let h11 = x * x * (x - one);
        let blend = |a: &[T], da: &[T], b: &[T], db: &[T]| -> Vec<T> {
            (0..a.len()).map(|j| h00 * a[j] + h10 * h * da[j] + h01 * b[j] + h11 * h * db[j]).collect()
        };
        PeakonState::new(blend(&s0.q, &dq0, &s1.q, &dq1), blend(&s0.p, &dp0, &s1.p, &dp1), s0.sector.clone())
    }

    /// Largest violation of the a priori bounds
    /// `‖q(t)‖_∞ ≤ ‖q(0)‖_∞ + ½Pt` and `p_j(t) ≤ p_j(0) e^{Pt/2}`;
    /// non-positive when both hold.
    pub fn apriori_violation(&self) -> T {
        let s0 = self.initial();
        let t0 = self.times[0];
        let big_p = s0.total_momentum();
        let half = T::lit(0.5);
        let mut worst = T::neg_infinity();
        for (&t, s) in self.times.iter().zip(&self.states) {
            let dt = t - t0;
            worst = worst.max(s.max_abs_q() - (s0.max_abs_q() + half * big_p * dt));
            for (pj, pj0) in s.p.iter().zip(&s0.p) {
                worst = worst.max(*pj - *pj0 * (half * big_p * dt).exp());
            }
        }
        worst
    }
}

/// Integrates the peakon equations from `s0` over `[0, cfg.t_end]`.
///
/// The sector ordering is checked at every accepted step; positions within
/// [`COLLISION_GAP`] abort with [`Error::Collision`].
pub fn integrate<T: Real>(s0: &PeakonState<T>, cfg: &IntegratorConfig<T>) -> Result<Trajectory<T>> {
    s0.validate()?;
    cfg.validate()?;
    let n = s0.n();
    let order = s0.sector.order(n);
    let family = s0.sector.family();
    let mut y0 = s0.q.clone();
    y0.extend_from_slice(&s0.p);

    let mut traj = Trajectory { times: vec![], states: vec![], ledger: vec![], diagnostics: Diagnostics::default() };
    let mut accepted = 0usize;
    let mut min_gap: Option<T> = None;
    let t_end = cfg.t_end;
    let collision = T::lit(COLLISION_GAP);

    let stats = dopri5(
        |_, y, dy| {
            let (dq, dp) = dy.split_at_mut(n);
            peakon_rhs(&y[..n], &y[n..], dq, dp);
        },
        T::zero(),
        &y0,
        cfg,
        |t, y, _| {
            let (q, p) = y.split_at(n);
            for w in order.windows(2) {
                let gap = match family {
                    Family::Minus => q[w[1]] - q[w[0]],
                    Family::Plus => q[w[0]] - q[w[1]],
                };
                min_gap = Some(min_gap.map_or(gap, |m: T| m.min(gap)));
                if !(gap > collision) {
                    return Err(Error::Collision { t: t.as_f64(), i: w[0] + 1, j: w[1] + 1, gap: gap.as_f64() });
                }
            }
            if let Some((j, &v)) = p.iter().enumerate().find(|(_, &v)| !(v > T::zero())) {
                return Err(Error::NonPositiveMomentum { index: j + 1, value: v.as_f64() });
            }
            let record = accepted.is_multiple_of(cfg.output_stride) || t >= t_end;
            accepted += 1;
            if record {
                let state = PeakonState { q: q.to_vec(), p: p.to_vec(), sector: s0.sector.clone() };
                traj.ledger.push(LedgerEntry::of(&state)?);
                traj.states.push(state);
                traj.times.push(t);
            }
            Ok(())
        },
    )?;
    traj.diagnostics = Diagnostics { steps: stats, min_gap: min_gap.map(Real::as_f64) };
    Ok(traj)
}

/// Per-time conserved quantities and their worst relative drift.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct ConservedReport<T: Real> {
    pub times: Vec<T>,
    pub rows: Vec<LedgerEntry<T>>,
    /// `max_t |X(t) − X(0)| / |X(0)|` for P, H, tr L, tr L², tr L³.
    pub max_relative_drift: [T; 5],
}

impl<T: Real> ConservedReport<T> {
    pub fn momentum_drift(&self) -> T {
        self.max_relative_drift[0]
    }

    pub fn hamiltonian_drift(&self) -> T {
        self.max_relative_drift[1]
    }
}

pub fn conserved_report<T: Real>(tr: &Trajectory<T>) -> Result<ConservedReport<T>> {
    let first = tr.ledger.first().ok_or_else(|| Error::TooFewSamples("empty trajectory".into()))?;
    let base = first.values();
    let mut drift = [T::zero(); 5];
    for row in &tr.ledger {
        for (d, (x, x0)) in drift.iter_mut().zip(row.values().iter().zip(&base)) {
            let scale = x0.abs().max(T::min_positive_value());
            *d = d.max((*x - *x0).abs() / scale);
        }
    }
    Ok(ConservedReport { times: tr.times.clone(), rows: tr.ledger.clone(), max_relative_drift: drift })
}

/// Outcome of evolving one state along both routes.
#[derive(Debug, Clone, PartialEq)]
pub struct RouteComparison<T: Real> {
    pub lax_ode: Matrix<T>,
    pub lax_factorization: Matrix<T>,
    /// `max|L_ode(t) − L_fact(t)|`.
    pub max_discrepancy: T,
    pub trajectory: Trajectory<T>,
}

/// Evolves `s0` to `cfg.t_end` by integration and by factorization and
/// compares the Lax matrices.
pub fn compare_routes<T: Real>(s0: &PeakonState<T>, cfg: &IntegratorConfig<T>, dt_max: T) -> Result<RouteComparison<T>> {
    let trajectory = integrate(s0, cfg)?;
    let lax_ode = lax_from_state(trajectory.last())?.matrix;
    let l0 = lax_from_state(s0)?.matrix;
    let lax_factorization = toda_solve(&l0, cfg.t_end, s0.sector.flow_sign(), dt_max)?;
    let max_discrepancy = lax_ode.max_abs_diff(&lax_factorization);
    Ok(RouteComparison { lax_ode, lax_factorization, max_discrepancy, trajectory })
}
