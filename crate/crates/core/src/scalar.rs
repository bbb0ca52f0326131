use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating-point scalar the library is generic over: `f32` or `f64`.
pub trait Real:
    Float
    + FromPrimitive
    + NumAssign
    + Sum
    + Default
    + Debug
    + Display
    + Serialize
    + DeserializeOwned
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal. Lossy for `f32`.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("finite literal")
    }

    /// Scales an `f64`-calibrated tolerance to this type's precision.
    ///
    /// Identity for `f64`; for `f32` the tolerance grows by the ratio of the
    /// machine epsilons.
    #[inline]
    fn tol(x: f64) -> Self {
        let eps = Self::epsilon().to_f64().unwrap_or(f64::EPSILON);
        Self::lit(x * (eps / f64::EPSILON).max(1.0))
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Sign with `sgn(0) = 0`.
    #[inline]
    fn sgn0(self) -> Self {
        if self > Self::zero() {
            Self::one()
        } else if self < Self::zero() {
            -Self::one()
        } else {
            Self::zero()
        }
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// `log(Σ exp(w_i))` with max subtraction. Returns `-inf` for an empty slice.
pub fn log_sum_exp<T: Real>(w: &[T]) -> T {
    let m = w.iter().copied().fold(T::neg_infinity(), T::max);
    if m == T::neg_infinity() {
        return m;
    }
    m + w.iter().map(|&x| (x - m).exp()).sum::<T>().ln()
}
