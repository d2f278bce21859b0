//! Flux-corrected transport for the nonconservative convection-diffusion
//! equation
//!
//! ```text
//! ρ_t + u ρ_x + λ ρ = (D ρ_x)_x + f
//! ```
//!
//! on 1D nonuniform and 2D tensor-product grids. A weighted (θ-type) hybrid
//! scheme blends a monotone upwind discretization with a central one; the
//! antidiffusive part is scaled by flux limiters chosen so that the
//! right-hand side of the update stays inside local max-principle bounds.
//! Limiters come from one of three sources:
//!
//! * `NDVL`: exact maximization of the limiter sum, a box-constrained LP
//!   that separates into one small problem per node ([`lp`]);
//! * `NDVA`: the closed-form approximate solution of that LP ([`limiter`]);
//! * `DIV`: face limiting of the divergent part of the convective flux.
//!
//! [`stepper::advance`] performs one time step (with the fixed-point outer
//! iteration for implicit weights) and [`bench`] holds the advection and
//! solid-body-rotation benchmarks.

pub mod bench;
pub mod config;
pub mod discretization;
pub mod error;
pub mod field;
pub mod grid;
pub mod limiter;
pub mod lp;
pub mod monotone;
pub mod problem;
pub mod stepper;

pub use config::{SchemeKind, StepConfig};
pub use error::{Error, Result};
pub use field::ScalarField;
pub use grid::{build_nonuniform_grid, build_uniform_grid, Domain, Grid, Lattice};
pub use problem::ProblemSpec;
pub use stepper::{advance, run_simulation, IterationReport};
