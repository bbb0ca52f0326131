//! Initial data: geometric momentum profiles and seeded random states.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lax::{Family, PeakonState, Permutation, Sector};
use crate::scalar::Real;

/// Deterministic generator used everywhere a seed is given.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `p_j = C r^j` for `j = 1..n` with consecutive gaps `d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometricProfile {
    pub c: f64,
    pub r: f64,
    pub gap: f64,
}

impl GeometricProfile {
    pub fn new(c: f64, r: f64, gap: f64) -> Result<Self> {
        let g = Self { c, r, gap };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::Config(format!("profile C must be positive, got {}", self.c)));
        }
        if !(self.r > 0.0 && self.r < 1.0) {
            return Err(Error::Config(format!("profile r must lie in (0, 1), got {}", self.r)));
        }
        if !(self.gap > 0.0 && self.gap.is_finite()) {
            return Err(Error::Config(format!("profile gap must be positive, got {}", self.gap)));
        }
        Ok(())
    }

    pub fn momenta(&self, n: usize) -> Vec<f64> {
        (1..=n).map(|j| self.c * self.r.powi(j as i32)).collect()
    }

    /// Velocity contribution bound of the truncated tail, `Σ_{k>n} p_k = C r^{n+1}/(1−r)`.
    pub fn tail_bound(&self, n: usize) -> f64 {
        self.c * self.r.powi(n as i32 + 1) / (1.0 - self.r)
    }

    /// State in `sector`. Positions along the sector order are
    /// `0, d, 2d, …` (increasing for `S₋`, decreasing for `S₊`); momenta
    /// follow the same order, so the relabeled state carries `C r^j` at `j`.
    pub fn state<T: Real>(&self, n: usize, sector: Sector) -> Result<PeakonState<T>> {
        self.validate()?;
        if n == 0 {
            return Err(Error::InvalidState("truncation size must be at least 1".into()));
        }
        let sign = match sector.family() {
            Family::Minus => 1.0,
            Family::Plus => -1.0,
        };
        let q: Vec<T> = (0..n).map(|j| T::lit(sign * self.gap * j as f64)).collect();
        let p: Vec<T> = self.momenta(n).into_iter().map(T::lit).collect();
        place(q, p, sector)
    }
}

/// Ranges for [`random_state`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RandomSpec {
    pub p_min: f64,
    pub p_max: f64,
    pub gap_min: f64,
    pub gap_max: f64,
}

impl Default for RandomSpec {
    fn default() -> Self {
        Self { p_min: 0.2, p_max: 2.0, gap_min: 0.5, gap_max: 2.0 }
    }
}

impl RandomSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.p_min > 0.0 && self.p_max >= self.p_min && self.p_max.is_finite()) {
            return Err(Error::Config("need 0 < p_min <= p_max".into()));
        }
        if !(self.gap_min > 0.0 && self.gap_max >= self.gap_min && self.gap_max.is_finite()) {
            return Err(Error::Config("need 0 < gap_min <= gap_max".into()));
        }
        Ok(())
    }
}

fn uniform<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    if hi > lo {
        rng.gen_range(lo..hi)
    } else {
        lo
    }
}

/// Random state in `sector` with momenta and consecutive gaps drawn
/// uniformly from `spec`; the first position along the sector order is 0.
pub fn random_state<T: Real, R: Rng + ?Sized>(rng: &mut R, n: usize, sector: Sector, spec: &RandomSpec) -> Result<PeakonState<T>> {
    spec.validate()?;
    if n == 0 {
        return Err(Error::InvalidState("truncation size must be at least 1".into()));
    }
    let sign = match sector.family() {
        Family::Minus => 1.0,
        Family::Plus => -1.0,
    };
    let mut q = Vec::with_capacity(n);
    let mut x = 0.0;
    for j in 0..n {
        if j > 0 {
            x += sign * uniform(rng, spec.gap_min, spec.gap_max);
        }
        q.push(T::lit(x));
    }
    let p = (0..n).map(|_| T::lit(uniform(rng, spec.p_min, spec.p_max))).collect();
    place(q, p, sector)
}

/// Uniformly random permutation of `{1..n}`.
pub fn random_permutation<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Permutation {
    let mut idx: Vec<usize> = (1..=n).collect();
    idx.shuffle(rng);
    Permutation::from_one_based(&idx).expect("shuffle is a bijection")
}

/// Places base-ordered data (`q`, `p` listed along the sector order) into
/// original indices.
fn place<T: Real>(q: Vec<T>, p: Vec<T>, sector: Sector) -> Result<PeakonState<T>> {
    let base = PeakonState::new(q, p, sector.base())?;
    let s = base.unrelabeled(&sector);
    s.validate()?;
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometric_profile() {
        let g = GeometricProfile::new(1.0, 0.5, 1.0).unwrap();
        assert_eq!(g.momenta(3), vec![0.5, 0.25, 0.125]);
        assert!((g.tail_bound(3) - 0.0625 / 0.5).abs() < 1e-16);
        let s: PeakonState<f64> = g.state(3, Sector::Plus).unwrap();
        assert_eq!(s.q, vec![0.0, -1.0, -2.0]);
        assert!(GeometricProfile::new(1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn permuted_placement() {
        let g = GeometricProfile::new(1.0, 0.5, 1.0).unwrap();
        let perm = Permutation::from_one_based(&[3, 1, 2]).unwrap();
        let s: PeakonState<f64> = g.state(3, Sector::PlusPerm { permutation: perm }).unwrap();
        // q_3 > q_1 > q_2 and the relabeled state is the base profile
        assert_eq!(s.q, vec![-1.0, -2.0, 0.0]);
        assert_eq!(s.relabeled().p, vec![0.5, 0.25, 0.125]);
    }

    #[test]
    fn seeded_states_repeat() {
        let a: PeakonState<f64> = random_state(&mut seeded_rng(7), 5, Sector::Minus, &RandomSpec::default()).unwrap();
        let b: PeakonState<f64> = random_state(&mut seeded_rng(7), 5, Sector::Minus, &RandomSpec::default()).unwrap();
        assert_eq!(a, b);
        assert!(a.min_gap().unwrap() >= 0.5);
        let perm = random_permutation(&mut seeded_rng(3), 6);
        assert_eq!(perm.len(), 6);
    }
}
