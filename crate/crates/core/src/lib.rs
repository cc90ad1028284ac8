//! Driven Dicke model: a collective spin S = N/2 driven by a resonant laser
//! and decaying collectively at rate Γ.
//!
//! Units: Γ = 1, times in 1/Γ, rates and Rabi frequencies in Γ.

// `!(x > 0.0)` is used on purpose so that NaN inputs are rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
mod banded;
pub mod dynamics;
pub mod error;
pub mod geometry;
pub mod integrate;
pub mod ladder;
mod lm;
pub mod meanfield;
pub mod oracle;
pub mod params;
pub mod quadrature;
pub mod steady;

pub use dynamics::{evolve, evolve_sampled, Trajectory};
pub use error::{Error, Result};
pub use ladder::{coupling_coeff, g2_zero, liouvillian_rhs, observables, DickeLadderState, ObservableSet};
pub use params::ModelParams;
pub use steady::{steady_state, steady_state_report, SteadyMethod, SteadyState};
