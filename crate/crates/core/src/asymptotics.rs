//! Long-time diagnostics: momentum sorting, linear scattering of positions,
//! separation of peaks, the finite-n shadow of the sublinear `S₋` regime,
//! and permuted sectors.
//!
//! Targets always come from the spectrum of the initial Lax operator.
//! In `S₊` the limit of `p_j` is `2λ_j`. At finite `n` the `S₋` limit is the
//! reversed assignment `2λ_{n+1−j}`; this is an observed property of the
//! truncated system (checked against long integrations), not a theorem.
//! Permuted sectors use the relabeled state, so original index `i` is
//! assigned target `λ_{π⁻¹(i)}` of the base sector.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flows::{integrate, Trajectory};
use crate::lax::{lax_from_state, Family, PeakonState, Permutation, Sector};
use crate::ode::IntegratorConfig;
use crate::scalar::Real;
use crate::spectral::{lax_spectrum, Spectrum};

/// Minimum number of samples in a fitting window.
pub const MIN_FIT_SAMPLES: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Thresholds {
    /// Absolute tolerance on `|p_j − target|`.
    pub momentum: f64,
    /// Absolute tolerance on `|slope_j − target|`.
    pub slope: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self { momentum: 1e-3, slope: 1e-3 }
    }
}

/// A permutation of `{1..n}` labelling a permuted sector.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SectorPermutation {
    pub n: usize,
    /// 1-based images `π(1), …, π(n)`.
    pub pi: Vec<usize>,
    pub valid: bool,
}

impl SectorPermutation {
    pub fn new(pi: &[usize]) -> Self {
        let valid = Permutation::from_one_based(pi).is_ok();
        Self { n: pi.len(), pi: pi.to_vec(), valid }
    }

    pub fn permutation(&self) -> Result<Permutation> {
        Permutation::from_one_based(&self.pi)
    }
}

/// Per-index row of a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct IndexRow<T: Real> {
    /// 1-based original index.
    pub j: usize,
    pub p_final: T,
    pub p_target: T,
    pub p_residual: T,
    /// Present once a scattering fit has been run.
    pub slope: Option<T>,
    pub slope_target: T,
    pub slope_residual: Option<T>,
    pub intercept: Option<T>,
    /// Root mean square deviation of `q_j` from the fitted line.
    pub fit_residual: Option<T>,
    /// `q̇_j(t_end)`.
    pub speed_final: T,
}

/// How a run with automatic extension of `t_end` ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtensionOutcome {
    Converged,
    CapReached,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct Extension<T: Real> {
    pub outcome: ExtensionOutcome,
    /// Every `t_end` tried, in order.
    pub attempts: Vec<T>,
    pub cap: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct AsymptoticsReport<T: Real> {
    pub sector: Sector,
    pub n: usize,
    /// Initial spectrum, descending.
    pub lambdas: Vec<T>,
    pub t_end: T,
    pub rows: Vec<IndexRow<T>>,
    pub max_momentum_residual: T,
    pub max_slope_residual: Option<T>,
    /// Fit window, when a scattering fit was run.
    pub window: Option<(T, T)>,
    /// `(t, min_{j≠k} |q_j − q_k|)` samples.
    pub gap_series: Vec<(T, T)>,
    /// Estimates `α_j = L_jj(t_end) = p_j(t_end)/2`.
    pub diagonal_limits: Vec<T>,
    pub thresholds: Thresholds,
    pub momentum_converged: bool,
    pub slope_converged: Option<bool>,
    pub separated: bool,
    pub extension: Option<Extension<T>>,
}

impl<T: Real> AsymptoticsReport<T> {
    /// Momentum flag and, when a fit exists, slope flag.
    pub fn converged(&self) -> bool {
        self.momentum_converged && self.slope_converged.unwrap_or(true)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// One row per index; empty fields for missing fit values.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("j,p_final,p_target,p_residual,slope,slope_target,slope_residual,intercept,fit_residual,speed_final\n");
        let opt = |x: Option<T>| x.map(|v| fmt_real(v)).unwrap_or_default();
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{}\n",
                r.j,
                fmt_real(r.p_final),
                fmt_real(r.p_target),
                fmt_real(r.p_residual),
                opt(r.slope),
                fmt_real(r.slope_target),
                opt(r.slope_residual),
                opt(r.intercept),
                opt(r.fit_residual),
                fmt_real(r.speed_final)
            ));
        }
        out
    }
}

/// Shortest decimal that round-trips the value as `f64`.
pub fn fmt_real<T: Real>(x: T) -> String {
    format!("{:?}", x.as_f64())
}

/// Limit of `p_j/2` (equivalently of `q̇_j`) for each original index.
pub fn speed_targets<T: Real>(lambdas: &[T], sector: &Sector) -> Vec<T> {
    let n = lambdas.len();
    let base: Vec<T> = match sector.family() {
        Family::Plus => lambdas.to_vec(),
        Family::Minus => lambdas.iter().rev().copied().collect(),
    };
    match sector.permutation() {
        None => base,
        // relabeled index j sits at original index π(j)
        Some(perm) => {
            let mut out = vec![T::zero(); n];
            for (j, &b) in base.iter().enumerate() {
                out[perm.apply(j)] = b;
            }
            out
        }
    }
}

fn check_sector<T: Real>(tr: &Trajectory<T>, spec0: &Spectrum<T>, expected: &Sector) -> Result<()> {
    let got = tr.sector().ok_or_else(|| Error::TooFewSamples("empty trajectory".into()))?;
    if got != expected {
        return Err(Error::SectorMismatch(format!("trajectory is {:?}, check requested {:?}", got, expected)));
    }
    if spec0.n() != tr.n() {
        return Err(Error::DimensionMismatch { expected: tr.n(), got: spec0.n() });
    }
    Ok(())
}

fn gap_series<T: Real>(tr: &Trajectory<T>) -> Vec<(T, T)> {
    tr.times.iter().zip(&tr.states).filter_map(|(&t, s)| s.min_gap().map(|g| (t, g))).collect()
}

/// Compares `p_j(t_end)` with the spectral targets.
pub fn sorting_check<T: Real>(tr: &Trajectory<T>, spec0: &Spectrum<T>, sector: &Sector, thresholds: Thresholds) -> Result<AsymptoticsReport<T>> {
    check_sector(tr, spec0, sector)?;
    let last = tr.last();
    let targets = speed_targets(&spec0.lambdas, sector);
    let (dq, _) = crate::flows::rhs(last)?;
    let two = T::lit(2.0);
    let rows: Vec<IndexRow<T>> = (0..tr.n())
        .map(|j| IndexRow {
            j: j + 1,
            p_final: last.p[j],
            p_target: two * targets[j],
            p_residual: (last.p[j] - two * targets[j]).abs(),
            slope: None,
            slope_target: targets[j],
            slope_residual: None,
            intercept: None,
            fit_residual: None,
            speed_final: dq[j],
        })
        .collect();
    let max_res = rows.iter().map(|r| r.p_residual).fold(T::zero(), T::max);
    let diagonal_limits = lax_from_state(last)?.matrix.diagonal();
    Ok(AsymptoticsReport {
        sector: sector.clone(),
        n: tr.n(),
        lambdas: spec0.lambdas.clone(),
        t_end: tr.t_end(),
        rows,
        max_momentum_residual: max_res,
        max_slope_residual: None,
        window: None,
        gap_series: gap_series(tr),
        diagonal_limits,
        thresholds,
        momentum_converged: max_res < T::lit(thresholds.momentum),
        slope_converged: None,
        separated: separation_check(tr).separated,
        extension: None,
    })
}

/// Least-squares line `(slope, intercept, rms)` through `(x, y)`.
pub fn linear_fit<T: Real>(x: &[T], y: &[T]) -> Result<(T, T, T)> {
    let m = x.len();
    if m < 2 || y.len() != m {
        return Err(Error::TooFewSamples(format!("linear fit needs at least 2 matching samples, got {m}")));
    }
    let mf = T::from_usize(m).expect("sample count");
    let xm = x.iter().copied().sum::<T>() / mf;
    let ym = y.iter().copied().sum::<T>() / mf;
    let mut sxx = T::zero();
    let mut sxy = T::zero();
    for (&a, &b) in x.iter().zip(y) {
        sxx += (a - xm) * (a - xm);
        sxy += (a - xm) * (b - ym);
    }
    if !(sxx > T::zero()) {
        return Err(Error::TooFewSamples("fit window has no spread in time".into()));
    }
    let slope = sxy / sxx;
    let intercept = ym - slope * xm;
    let ss: T = x.iter().zip(y).map(|(&a, &b)| (b - intercept - slope * a).powi(2)).sum();
    Ok((slope, intercept, (ss / mf).sqrt()))
}

/// Sorting check plus a least-squares fit of `q_j(t)` over `window`.
pub fn scattering_fit<T: Real>(
    tr: &Trajectory<T>,
    spec0: &Spectrum<T>,
    sector: &Sector,
    window: (T, T),
    thresholds: Thresholds,
) -> Result<AsymptoticsReport<T>> {
    let mut rep = sorting_check(tr, spec0, sector, thresholds)?;
    let idx: Vec<usize> = (0..tr.len()).filter(|&i| tr.times[i] >= window.0 && tr.times[i] <= window.1).collect();
    if idx.len() < MIN_FIT_SAMPLES {
        return Err(Error::TooFewSamples(format!(
            "window [{}, {}] holds {} samples, need {MIN_FIT_SAMPLES}",
            window.0,
            window.1,
            idx.len()
        )));
    }
    let t: Vec<T> = idx.iter().map(|&i| tr.times[i]).collect();
    let mut worst = T::zero();
    for row in rep.rows.iter_mut() {
        let q: Vec<T> = idx.iter().map(|&i| tr.states[i].q[row.j - 1]).collect();
        let (slope, intercept, rms) = linear_fit(&t, &q)?;
        let res = (slope - row.slope_target).abs();
        worst = worst.max(res);
        row.slope = Some(slope);
        row.intercept = Some(intercept);
        row.fit_residual = Some(rms);
        row.slope_residual = Some(res);
    }
    rep.max_slope_residual = Some(worst);
    rep.slope_converged = Some(worst < T::lit(thresholds.slope));
    rep.window = Some(window);
    Ok(rep)
}

/// Late half of the recorded time span.
pub fn late_window<T: Real>(tr: &Trajectory<T>) -> (T, T) {
    let end = tr.t_end();
    (end * T::lit(0.5), end)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct Separation<T: Real> {
    pub series: Vec<(T, T)>,
    pub separated: bool,
}

/// Minimum pairwise distance over time; flagged when it increases strictly
/// over the last quartile of samples and ends above its initial value.
pub fn separation_check<T: Real>(tr: &Trajectory<T>) -> Separation<T> {
    let series = gap_series(tr);
    if series.is_empty() {
        return Separation { series, separated: true };
    }
    let m = series.len();
    let start = (3 * m) / 4;
    let tail = &series[start.min(m - 1)..];
    let increasing = tail.windows(2).all(|w| w[1].1 > w[0].1);
    let grew = series[m - 1].1 > series[0].1;
    Separation { separated: increasing && grew, series }
}

/// `‖L − diag L‖_F` at each recorded time.
pub fn offdiagonal_mass<T: Real>(tr: &Trajectory<T>) -> Result<Vec<T>> {
    tr.states
        .iter()
        .map(|s| {
            let l = lax_from_state(s)?.matrix;
            let n = l.rows();
            let mut acc = T::zero();
            for i in 0..n {
                for j in 0..n {
                    if i != j {
                        acc += l[(i, j)] * l[(i, j)];
                    }
                }
            }
            Ok(acc.sqrt())
        })
        .collect()
}

/// One run of the `S₋` trend table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct TrendRun<T: Real> {
    pub n: usize,
    /// Fitted late-time speed of `q₁`.
    pub slope_q1: T,
    /// `p₁(t_end)`.
    pub plateau_p1: T,
    /// Smallest eigenvalue, the finite-n limit of the `q₁` speed.
    pub lambda_min: T,
}

impl<T: Real> TrendRun<T> {
    pub fn from_trajectory(tr: &Trajectory<T>, spec0: &Spectrum<T>, window: (T, T)) -> Result<Self> {
        let idx: Vec<usize> = (0..tr.len()).filter(|&i| tr.times[i] >= window.0 && tr.times[i] <= window.1).collect();
        if idx.len() < MIN_FIT_SAMPLES {
            return Err(Error::TooFewSamples(format!("trend window holds {} samples", idx.len())));
        }
        let t: Vec<T> = idx.iter().map(|&i| tr.times[i]).collect();
        let q: Vec<T> = idx.iter().map(|&i| tr.states[i].q[0]).collect();
        let (slope, _, _) = linear_fit(&t, &q)?;
        Ok(Self {
            n: tr.n(),
            slope_q1: slope,
            plateau_p1: tr.last().p[0],
            lambda_min: *spec0.lambdas.last().expect("non-empty spectrum"),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct TrendTable<T: Real> {
    /// Sorted by increasing `n`.
    pub runs: Vec<TrendRun<T>>,
    pub slope_decreasing: bool,
    pub plateau_decreasing: bool,
}

/// Checks that the `q₁` speed and the `p₁` plateau decrease strictly with `n`.
pub fn sublinear_trend<T: Real>(runs: &[TrendRun<T>]) -> Result<TrendTable<T>> {
    if runs.len() < 3 {
        return Err(Error::TooFewSamples(format!("fewer than 3 runs ({})", runs.len())));
    }
    let mut runs = runs.to_vec();
    runs.sort_by_key(|r| r.n);
    let slope_decreasing = runs.windows(2).all(|w| w[1].slope_q1 < w[0].slope_q1);
    let plateau_decreasing = runs.windows(2).all(|w| w[1].plateau_p1 < w[0].plateau_p1);
    Ok(TrendTable { runs, slope_decreasing, plateau_decreasing })
}

/// Appends `next` (whose clock starts at 0) after `tr`.
fn concatenate<T: Real>(tr: &mut Trajectory<T>, next: Trajectory<T>) {
    let offset = tr.t_end();
    let skip = 1; // first sample duplicates the previous endpoint
    tr.times.extend(next.times.iter().skip(skip).map(|&t| t + offset));
    tr.states.extend(next.states.into_iter().skip(skip));
    tr.ledger.extend(next.ledger.into_iter().skip(skip));
    let (a, b) = (&mut tr.diagnostics, next.diagnostics);
    a.steps.accepted += b.steps.accepted;
    a.steps.rejected += b.steps.rejected;
    a.steps.evaluations += b.steps.evaluations;
    a.steps.max_rhs_norm = a.steps.max_rhs_norm.max(b.steps.max_rhs_norm);
    a.min_gap = match (a.min_gap, b.min_gap) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, y) => x.or(y),
    };
}

/// Integrated run with its report.
#[derive(Debug, Clone)]
pub struct AsymptoticsRun<T: Real> {
    pub trajectory: Trajectory<T>,
    pub spectrum: Spectrum<T>,
    pub report: AsymptoticsReport<T>,
}

/// Integrates `s0` to `cfg.t_end`, then keeps doubling the horizon (by
/// continuing from the last state) until the sorting and late-window slope
/// checks pass or `cap` is reached.
pub fn run_with_extension<T: Real>(s0: &PeakonState<T>, cfg: &IntegratorConfig<T>, cap: T, thresholds: Thresholds) -> Result<AsymptoticsRun<T>> {
    let spectrum = lax_spectrum(&lax_from_state(&s0.relabeled())?.matrix, None)?;
    let mut tr = integrate(s0, cfg)?;
    let mut attempts = vec![tr.t_end()];
    loop {
        let rep = evaluate(&tr, &spectrum, &s0.sector, thresholds)?;
        let done = rep.converged();
        let t = tr.t_end();
        if done || t >= cap {
            let outcome = if done { ExtensionOutcome::Converged } else { ExtensionOutcome::CapReached };
            let mut report = rep;
            report.extension = Some(Extension { outcome, attempts, cap });
            return Ok(AsymptoticsRun { trajectory: tr, spectrum, report });
        }
        let extra = t.min(cap - t);
        let next = integrate(&tr.last().clone(), &cfg.clone().with_t_end(extra))?;
        concatenate(&mut tr, next);
        attempts.push(tr.t_end());
    }
}

/// Sorting check plus a late-window fit when the window is long enough,
/// otherwise the sorting check alone.
fn evaluate<T: Real>(tr: &Trajectory<T>, spec0: &Spectrum<T>, sector: &Sector, thresholds: Thresholds) -> Result<AsymptoticsReport<T>> {
    match scattering_fit(tr, spec0, sector, late_window(tr), thresholds) {
        Err(Error::TooFewSamples(_)) => sorting_check(tr, spec0, sector, thresholds),
        other => other,
    }
}

/// Permuted-sector experiment.
#[derive(Debug, Clone)]
pub struct PermutedRun<T: Real> {
    pub run: AsymptoticsRun<T>,
    /// Largest entrywise difference between the relabeled original-index
    /// trajectory and a direct integration of the relabeled initial state,
    /// at the final time.
    pub relabeling_discrepancy: T,
}

/// Integrates a permuted-sector state in its original indices, checks
/// `p_i → 2λ_{π⁻¹(i)}` and slopes `λ_{π⁻¹(i)}`, and compares with the
/// relabeled system integrated directly.
pub fn permuted_sector_run<T: Real>(s0: &PeakonState<T>, cfg: &IntegratorConfig<T>, cap: T, thresholds: Thresholds) -> Result<PermutedRun<T>> {
    s0.validate()?;
    let run = run_with_extension(s0, cfg, cap, thresholds)?;
    let base = s0.relabeled();
    let direct = integrate(&base, &cfg.clone().with_t_end(run.trajectory.t_end()))?;
    let relabeled_end = run.trajectory.last().relabeled();
    let d = direct.last();
    let relabeling_discrepancy = relabeled_end
        .q
        .iter()
        .zip(&d.q)
        .chain(relabeled_end.p.iter().zip(&d.p))
        .map(|(&a, &b)| (a - b).abs())
        .fold(T::zero(), T::max);
    Ok(PermutedRun { run, relabeling_discrepancy })
}
