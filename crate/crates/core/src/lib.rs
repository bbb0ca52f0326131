//! Peakon dynamics for the Camassa–Holm equation, truncated to `n` peaks.
//!
//! Two independent routes evolve the same system:
//!
//! * direct adaptive integration of the peakon equations of motion
//!   ([`flows::integrate`]), and
//! * the factorization solution of the associated (±) Toda flow on the
//!   semiseparable Lax matrix ([`flows::toda_solve`]).
//!
//! Around these sit the Lie-algebraic machinery the flows are built on
//! ([`algebra`], [`compound`], [`expm`]), the Lax operator and its tridiagonal
//! inverse ([`lax`]), spectral data with first-row-positive eigenvectors
//! ([`spectral`]), long-time diagnostics ([`asymptotics`]) and wave-profile
//! reconstruction ([`wavefield`]).
//!
//! Every numeric routine is generic over [`Real`] (`f32` or `f64`); the
//! aliases at the crate root fix the scalar to `f64`, which is what the CLI
//! and the acceptance suite use.

// `!(x > 0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod algebra;
pub mod asymptotics;
pub mod compound;
pub mod eigen;
pub mod error;
pub mod expm;
pub mod flows;
pub mod generate;
pub mod lax;
pub mod matrix;
pub mod ode;
pub mod scalar;
pub mod spectral;
pub mod verify;
pub mod wavefield;

pub use error::{Error, Result};
pub use scalar::Real;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Dense `f64` matrix.
pub type Mat = matrix::Matrix<f64>;
/// `f64` phase-space point.
pub type State = lax::PeakonState<f64>;
/// `f64` Lax operator.
pub type Lax = lax::LaxOperator<f64>;
/// `f64` spectral data.
pub type Spec = spectral::Spectrum<f64>;
/// `f64` trajectory.
pub type Traj = flows::Trajectory<f64>;
/// `f64` factorization pair.
pub type Factors = flows::FactorizationPair<f64>;
/// `f64` integrator settings.
pub type Config = ode::IntegratorConfig<f64>;
/// `f64` asymptotics report.
pub type Report = asymptotics::AsymptoticsReport<f64>;
