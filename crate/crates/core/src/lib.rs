//! Steady two-dimensional periodic gravity waves with a prescribed vorticity
//! function, computed on a fixed conformal strip `R x (-h, 0)`.
//!
//! The unknown is `(lambda, q, w, phi)`: surface relative velocity of the
//! laminar flow, Bernoulli deviation, surface profile and stream-function
//! perturbation. Waves are zeros of `F = id - M`, see [`operator`].
//!
//! Everything numeric is generic over [`Real`]; the `*64` aliases below fix
//! the scalar to `f64`, which is what the tolerances in the test-suite assume.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod continuation;
pub mod diagnostics;
pub mod elliptic;
pub mod laminar;
mod linalg;
pub mod operator;
mod real;
pub mod spectral;

mod error;

pub use error::{Error, Margins, Result};
pub use real::Real;

pub type PeriodicScalar64 = spectral::PeriodicScalar<f64>;
pub type StripField64 = spectral::StripField<f64>;
pub type Discretization64 = spectral::Discretization<f64>;
pub type Vorticity64 = laminar::Vorticity<f64>;
pub type LaminarFlow64 = laminar::LaminarFlow<f64>;
pub type Problem64 = operator::Problem<f64>;
pub type State64 = operator::State<f64>;
pub type BranchPoint64 = continuation::BranchPoint<f64>;
pub type ContinuationConfig64 = continuation::ContinuationConfig<f64>;
