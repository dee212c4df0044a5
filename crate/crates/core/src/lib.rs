//! Simulator and verification toolkit for two competing species dispersing
//! under the strategy-driven operator `div[a grad(u/P)]` with no-flux
//! boundary conditions on a 1-D interval.
//!
//! The crate is organized around six pieces:
//!
//! * [`domain`] - grid, cell-centered fields, profile expressions, quadrature
//!   and field predicates;
//! * [`operator`] - the conservative flux-form dispersal operator;
//! * [`dynamics`] - semi-implicit time integration and stationary solves;
//! * [`spectra`] - principal eigenvalues of the linearized problems and
//!   Rayleigh quotients;
//! * [`analysis`] - integral identities, thresholds, and competition-outcome
//!   prediction/classification;
//! * [`scenario`] + [`commands`] - scenario files and the `disperse` CLI.

pub mod analysis;
pub mod commands;
pub mod domain;
pub mod dynamics;
pub mod error;
pub mod operator;
pub mod report;
pub mod scenario;
pub mod spectra;
pub mod tridiag;

pub use error::{Error, Result};
