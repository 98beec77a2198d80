//! Finite-difference laboratory for the damped wave equation
//!
//! ```text
//! c(x) u_tt - div(b(x) grad u) + a(x) u_t = h(x, t)
//! ```
//!
//! with radial power-law coefficients. The crate evolves the equation and
//! the equations for its time derivatives, measures energies and related
//! functionals along the way, and checks the structural hypotheses (weight
//! functions, subsolutions, propagation cones) under which those functionals
//! are expected to decay at explicit polynomial rates.

pub mod certificates;
pub mod coefficients;
pub mod decay;
pub mod energetics;
pub mod error;
pub mod solver;
pub mod support;

pub use coefficients::{
    make_power_law, CoefficientField, InitialData, InitialShape, PowerLawEnvelope, Profile, ProfileKind, SourceField,
};
pub use error::{Error, Result};
pub use solver::{Cadence, Discretization, Grid, RunConfig, Snapshot, Trajectory};
