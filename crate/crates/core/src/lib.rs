//! Mass- and energy-conserving solver for the regularized logarithmic
//! Schrödinger equation on periodic 1D/2D domains.
//!
//! Space is discretized with the Fourier pseudo-spectral method and time
//! with a prediction–correction Gauss Runge–Kutta scheme augmented by two
//! supplementary variables, which are fixed every step by a 2×2 Newton
//! solve so that the discrete mass and the discrete original energy are
//! preserved to round-off.

// `!(x > tol)` guards are written to reject NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod experiments;
pub mod field;
pub mod grid;
pub mod integrator;
pub mod model;
pub mod spectral;
pub mod tableau;

pub use error::{Error, Result};
pub use field::ComplexField;
pub use grid::{Axis, Grid};
pub use integrator::{Integrator, SolverConfig, StepEvent, StepReport};
pub use model::ModelParams;
pub use num_complex::Complex64;
pub use spectral::{solve_stage_system, SpectralOperator, StageSolver, StageSystem};
pub use tableau::ButcherTableau;
