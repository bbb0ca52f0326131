//! Dormand–Prince 5(4) integrator with PI step-size control.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "", default)]
pub struct IntegratorConfig<T: Real> {
    pub rel_tol: T,
    pub abs_tol: T,
    /// Chosen automatically when absent.
    pub initial_step: Option<T>,
    pub max_step: T,
    pub t_end: T,
    /// Record every `output_stride`-th accepted step (the last step is always recorded).
    pub output_stride: usize,
    pub max_steps: usize,
}

impl<T: Real> Default for IntegratorConfig<T> {
    fn default() -> Self {
        Self {
            rel_tol: T::tol(1e-10),
            abs_tol: T::tol(1e-12),
            initial_step: None,
            max_step: T::infinity(),
            t_end: T::lit(10.0),
            output_stride: 1,
            max_steps: 50_000_000,
        }
    }
}

impl<T: Real> IntegratorConfig<T> {
    pub fn with_t_end(mut self, t_end: T) -> Self {
        self.t_end = t_end;
        self
    }

    pub fn with_tolerances(mut self, rel_tol: T, abs_tol: T) -> Self {
        self.rel_tol = rel_tol;
        self.abs_tol = abs_tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > T::zero() && self.abs_tol > T::zero()) {
            return Err(Error::Config("tolerances must be positive".into()));
        }
        if !(self.t_end > T::zero()) || !self.t_end.is_finite() {
            return Err(Error::Config("t_end must be positive and finite".into()));
        }
        if !(self.max_step > T::zero()) {
            return Err(Error::Config("max_step must be positive".into()));
        }
        if let Some(h) = self.initial_step {
            if !(h > T::zero()) {
                return Err(Error::Config("initial_step must be positive".into()));
            }
        }
        if self.output_stride == 0 {
            return Err(Error::Config("output_stride must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
    /// Largest `max_i |f_i|` seen at an accepted point.
    pub max_rhs_norm: f64,
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// fifth-order weights minus embedded fourth-order weights
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;
const ALPHA: f64 = 0.7 / 5.0;
const BETA: f64 = 0.4 / 5.0;

fn err_norm<T: Real>(err: &[T], y: &[T], y_new: &[T], cfg: &IntegratorConfig<T>) -> T {
    let n = T::from_usize(err.len()).unwrap_or_else(T::one);
    let s: T = err
        .iter()
        .zip(y.iter().zip(y_new))
        .map(|(&e, (&a, &b))| {
            let sc = cfg.abs_tol + cfg.rel_tol * a.abs().max(b.abs());
            let r = e / sc;
            r * r
        })
        .sum();
    (s / n).sqrt()
}

fn max_norm<T: Real>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |m, &x| m.max(x.abs()))
}

/// Integrates `y' = f(t, y)` from `t0` to `cfg.t_end`, landing exactly on
/// `t_end`. `on_accept(t, y, f(t, y))` is called at `t0` and after every
/// accepted step; an error from it aborts the integration.
pub fn dopri5<T, F, G>(mut f: F, t0: T, y0: &[T], cfg: &IntegratorConfig<T>, mut on_accept: G) -> Result<StepStats>
where
    T: Real,
    F: FnMut(T, &[T], &mut [T]),
    G: FnMut(T, &[T], &[T]) -> Result<()>,
{
    cfg.validate()?;
    let dim = y0.len();
    let mut stats = StepStats::default();
    let mut t = t0;
    let mut y = y0.to_vec();
    let mut k: Vec<Vec<T>> = vec![vec![T::zero(); dim]; 7];
    let mut y_stage = vec![T::zero(); dim];
    let mut y_new = vec![T::zero(); dim];
    let mut err = vec![T::zero(); dim];

    f(t, &y, &mut k[0]);
    stats.evaluations += 1;
    stats.max_rhs_norm = max_norm(&k[0]).as_f64();
    on_accept(t, &y, &k[0])?;

    let t_end = cfg.t_end;
    if t >= t_end {
        return Ok(stats);
    }
    let mut h = match cfg.initial_step {
        Some(h) => h,
        None => initial_step(&mut f, t, &y, &k[0], cfg, &mut stats),
    }
    .min(cfg.max_step)
    .min(t_end - t);
    let mut err_prev = T::lit(1e-4);
    let mut last_rejected = false;

    loop {
        if stats.accepted + stats.rejected >= cfg.max_steps {
            return Err(Error::StepUnderflow { t: t.as_f64(), h: h.as_f64() });
        }
        if h <= T::lit(10.0) * T::epsilon() * t.abs().max(T::one()) {
            return Err(Error::StepUnderflow { t: t.as_f64(), h: h.as_f64() });
        }
        for s in 1..7 {
            for i in 0..dim {
                let mut acc = y[i];
                for (j, kj) in k.iter().enumerate().take(s) {
                    let a = A[s][j];
                    if a != 0.0 {
                        acc += h * T::lit(a) * kj[i];
                    }
                }
                y_stage[i] = acc;
            }
            let ts = t + T::lit(C[s]) * h;
            f(ts, &y_stage, &mut k[s]);
            stats.evaluations += 1;
            if s == 6 {
                y_new.copy_from_slice(&y_stage);
            }
        }
        for i in 0..dim {
            let mut e = T::zero();
            for (j, kj) in k.iter().enumerate() {
                if E[j] != 0.0 {
                    e += T::lit(E[j]) * kj[i];
                }
            }
            err[i] = h * e;
        }
        let en = err_norm(&err, &y, &y_new, cfg);
        if !en.is_finite() {
            stats.rejected += 1;
            h *= T::lit(FAC_MIN);
            last_rejected = true;
            continue;
        }
        if en <= T::one() {
            let t_next = if t_end - (t + h) <= T::lit(4.0) * T::epsilon() * t_end.abs() { t_end } else { t + h };
            t = t_next;
            std::mem::swap(&mut y, &mut y_new);
            // first-same-as-last: stage 7 is f(t + h, y_new)
            k.swap(0, 6);
            stats.accepted += 1;
            stats.max_rhs_norm = stats.max_rhs_norm.max(max_norm(&k[0]).as_f64());
            on_accept(t, &y, &k[0])?;
            if t >= t_end {
                return Ok(stats);
            }
            let en_c = en.max(T::lit(1e-10));
            let mut fac = T::lit(SAFETY) * en_c.powf(-T::lit(ALPHA)) * err_prev.powf(T::lit(BETA));
            fac = fac.min(T::lit(FAC_MAX)).max(T::lit(FAC_MIN));
            if last_rejected {
                fac = fac.min(T::one());
            }
            err_prev = en_c;
            last_rejected = false;
            h = (h * fac).min(cfg.max_step).min(t_end - t);
        } else {
            stats.rejected += 1;
            let fac = (T::lit(SAFETY) * en.powf(-T::lit(ALPHA))).max(T::lit(FAC_MIN));
            h *= fac;
            last_rejected = true;
        }
    }
}

fn initial_step<T, F>(f: &mut F, t: T, y: &[T], f0: &[T], cfg: &IntegratorConfig<T>, stats: &mut StepStats) -> T
where
    T: Real,
    F: FnMut(T, &[T], &mut [T]),
{
    let dim = y.len();
    let sc: Vec<T> = y.iter().map(|&v| cfg.abs_tol + cfg.rel_tol * v.abs()).collect();
    let rms = |v: &[T]| -> T {
        let s: T = v.iter().zip(&sc).map(|(&a, &s)| (a / s) * (a / s)).sum();
        (s / T::from_usize(dim.max(1)).unwrap()).sqrt()
    };
    let d0 = rms(y);
    let d1 = rms(f0);
    let h0 = if d0 < T::lit(1e-5) || d1 < T::lit(1e-5) { T::lit(1e-6) } else { T::lit(0.01) * d0 / d1 };
    let y1: Vec<T> = y.iter().zip(f0).map(|(&a, &b)| a + h0 * b).collect();
    let mut f1 = vec![T::zero(); dim];
    f(t + h0, &y1, &mut f1);
    stats.evaluations += 1;
    let diff: Vec<T> = f1.iter().zip(f0).map(|(&a, &b)| a - b).collect();
    let d2 = rms(&diff) / h0;
    let h1 = if d1.max(d2) <= T::lit(1e-15) {
        (h0 * T::lit(1e-3)).max(T::lit(1e-6))
    } else {
        (T::lit(0.01) / d1.max(d2)).powf(T::lit(0.2))
    };
    (h0 * T::lit(100.0)).min(h1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay() {
        let cfg = IntegratorConfig::<f64>::default().with_t_end(5.0);
        let mut last = (0.0, 0.0);
        let stats = dopri5(
            |_, y, dy| dy[0] = -y[0],
            0.0,
            &[1.0],
            &cfg,
            |t, y, _| {
                last = (t, y[0]);
                Ok(())
            },
        )
        .unwrap();
        assert_eq!(last.0, 5.0);
        assert!((last.1 - (-5.0f64).exp()).abs() < 1e-10);
        assert!(stats.accepted > 0);
    }

    #[test]
    fn harmonic_oscillator_energy() {
        let cfg = IntegratorConfig::<f64>::default().with_t_end(20.0).with_tolerances(1e-11, 1e-13);
        let mut end = vec![];
        dopri5(
            |_, y, dy| {
                dy[0] = y[1];
                dy[1] = -y[0];
            },
            0.0,
            &[1.0, 0.0],
            &cfg,
            |_, y, _| {
                end = y.to_vec();
                Ok(())
            },
        )
        .unwrap();
        assert!((end[0] - 20f64.cos()).abs() < 1e-9);
        assert!((end[1] + 20f64.sin()).abs() < 1e-9);
    }

    #[test]
    fn callback_error_aborts() {
        let cfg = IntegratorConfig::<f64>::default();
        let r = dopri5(|_, _, dy| dy[0] = 1.0, 0.0, &[0.0], &cfg, |t, _, _| {
            if t > 1.0 {
                Err(Error::Config("stop".into()))
            } else {
                Ok(())
            }
        });
        assert!(r.is_err());
    }

    #[test]
    fn blow_up_underflows() {
        let cfg = IntegratorConfig::<f64>::default().with_t_end(2.0);
        let r = dopri5(|_, y, dy| dy[0] = y[0] * y[0], 0.0, &[1.0], &cfg, |_, _, _| Ok(()));
        assert!(matches!(r, Err(Error::StepUnderflow { .. })));
    }

    #[test]
    fn invalid_config() {
        let cfg = IntegratorConfig::<f64> { rel_tol: 0.0, ..Default::default() };
        assert!(cfg.validate().is_err());
        let cfg = IntegratorConfig::<f64>::default().with_t_end(-1.0);
        assert!(cfg.validate().is_err());
    }
}
