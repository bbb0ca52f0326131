//! Wave profile `u(x,t) = ½ Σ_j e^{−|x−q_j(t)|} p_j(t)` on grids, and its
//! distance from the long-time profiles.

use serde::{Deserialize, Serialize};

use crate::asymptotics::fmt_real;
use crate::error::{Error, Result};
use crate::flows::Trajectory;
use crate::lax::{Family, PeakonState};
use crate::scalar::Real;
use crate::spectral::Spectrum;

/// `u(x) = ½ Σ_j e^{−|x−q_j|} p_j`.
pub fn evaluate_u<T: Real>(s: &PeakonState<T>, x: T) -> T {
    let half = T::lit(0.5);
    s.q.iter().zip(&s.p).map(|(&q, &p)| half * (-(x - q).abs()).exp() * p).sum()
}

/// `Σ_j λ_j e^{−|x−λ_j t|}`.
pub fn scattered_profile<T: Real>(lambdas: &[T], t: T, x: T) -> T {
    lambdas.iter().map(|&l| l * (-(x - l * t).abs()).exp()).sum()
}

/// Uniform samples `x_min, …, x_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct WaveGridSpec<T: Real> {
    pub x_min: T,
    pub x_max: T,
    pub count: usize,
}

impl<T: Real> WaveGridSpec<T> {
    pub fn new(x_min: T, x_max: T, count: usize) -> Result<Self> {
        let g = Self { x_min, x_max, count };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.count < 2 {
            return Err(Error::Config(format!("grid needs at least 2 points, got {}", self.count)));
        }
        if !(self.x_min.is_finite() && self.x_max.is_finite() && self.x_max > self.x_min) {
            return Err(Error::Config("grid needs finite x_min < x_max".into()));
        }
        Ok(())
    }

    pub fn xs(&self) -> Vec<T> {
        let h = (self.x_max - self.x_min) / T::from_usize(self.count - 1).expect("count");
        (0..self.count)
            .map(|i| if i + 1 == self.count { self.x_max } else { self.x_min + h * T::from_usize(i).expect("index") })
            .collect()
    }

    pub fn covers(&self, lo: T, hi: T) -> bool {
        self.x_min <= lo && self.x_max >= hi
    }
}

/// How a grid's states were obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StateSource {
    /// Every requested time was a recorded sample.
    Recorded,
    /// Cubic Hermite interpolation on `(q, p)` with derivatives from the
    /// equations of motion.
    CubicHermite,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct WaveGrid<T: Real> {
    pub grid: WaveGridSpec<T>,
    pub times: Vec<T>,
    /// `values[k][i] = u(x_i, t_k)`.
    pub values: Vec<Vec<T>>,
    pub source: StateSource,
}

impl<T: Real> WaveGrid<T> {
    /// Header `t,x,u`, rows ordered by time then x.
    pub fn to_csv(&self) -> String {
        let xs = self.grid.xs();
        let mut out = String::from("t,x,u\n");
        for (t, row) in self.times.iter().zip(&self.values) {
            for (x, u) in xs.iter().zip(row) {
                out.push_str(&format!("{},{},{}\n", fmt_real(*t), fmt_real(*x), fmt_real(*u)));
            }
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn len(&self) -> usize {
        self.values.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Profile at one state.
pub fn grid_values<T: Real>(s: &PeakonState<T>, grid: &WaveGridSpec<T>) -> Vec<T> {
    grid.xs().into_iter().map(|x| evaluate_u(s, x)).collect()
}

/// Fills a grid at each requested time.
pub fn emit_grid<T: Real>(tr: &Trajectory<T>, grid: &WaveGridSpec<T>, times: &[T]) -> Result<WaveGrid<T>> {
    grid.validate()?;
    if times.is_empty() {
        return Err(Error::TooFewSamples("no times selected for the wave grid".into()));
    }
    if tr.is_empty() {
        return Err(Error::TooFewSamples("empty trajectory".into()));
    }
    let mut source = StateSource::Recorded;
    let mut values = Vec::with_capacity(times.len());
    for &t in times {
        if tr.times.binary_search_by(|x| x.partial_cmp(&t).expect("finite times")).is_err() {
            source = StateSource::CubicHermite;
        }
        let s = tr.state_at(t)?;
        values.push(grid_values(&s, grid));
    }
    Ok(WaveGrid { grid: *grid, times: times.to_vec(), values, source })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct ProfileResidual<T: Real> {
    /// Sup-norm over the grid.
    pub residual: T,
    /// Where the sup is attained.
    pub at_x: T,
    /// False when the grid misses part of `[min q, max q]`.
    pub covers_hull: bool,
}

/// Sup over the grid of `|u(x,t) − Σ_j λ_j e^{−|x−λ_j t|}|` for `S₊`
/// families, or of `|u(x,t)|` for `S₋` families.
pub fn asymptotic_residual<T: Real>(s: &PeakonState<T>, spec0: &Spectrum<T>, t: T, grid: &WaveGridSpec<T>) -> Result<ProfileResidual<T>> {
    s.validate()?;
    grid.validate()?;
    if spec0.n() != s.n() {
        return Err(Error::DimensionMismatch { expected: s.n(), got: spec0.n() });
    }
    let lo = s.q.iter().copied().fold(T::infinity(), T::min);
    let hi = s.q.iter().copied().fold(T::neg_infinity(), T::max);
    let family = s.sector.family();
    let mut best = (T::zero(), grid.x_min);
    for x in grid.xs() {
        let u = evaluate_u(s, x);
        let target = match family {
            Family::Plus => scattered_profile(&spec0.lambdas, t, x),
            Family::Minus => T::zero(),
        };
        let d = (u - target).abs();
        if d > best.0 {
            best = (d, x);
        }
    }
    Ok(ProfileResidual { residual: best.0, at_x: best.1, covers_hull: grid.covers(lo, hi) })
}
