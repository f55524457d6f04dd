//! Crank-Nicolson ADI solver for coupled two-dimensional, two-sided
//! space-fractional reaction-diffusion systems, with the SIV host-vector
//! epidemic model as the built-in reaction.
//!
//! The crate is organised bottom-up:
//!
//! - [`grunwald`]: Grünwald-Letnikov weights and shifted fractional operators.
//! - [`solver`]: factorized implicit systems for one grid line.
//! - [`siv`]: reaction terms, parameters and the three-field state.
//! - [`adi`]: the Peaceman-Rachford stepper.
//! - [`oracle`]: unsplit and explicit reference solvers used for verification.
//! - [`scenario`]: scenario files, initial conditions, the run loop and snapshots.

pub mod adi;
pub mod error;
pub mod grid;
pub mod grunwald;
pub mod oracle;
pub mod scenario;
pub mod siv;
pub mod solver;

pub use adi::{AdiStepper, AdiWorkspace, Dirichlet, SchemeConfig};
pub use error::{Error, Result};
pub use grid::{Axis, Compartment, Domain, Field2D, Shape};
pub use grunwald::{grunwald_weights, Coefficient, FractionalOperator, GrunwaldWeights, Side};
pub use siv::{reaction_terms, Diffusion, SivParams, SivState};
