//! Zero-temperature phase diagram, fluctuation spectrum and measurement
//! back-action diffusion of a laser-driven Bose-Einstein condensate in a
//! single-mode optical cavity, described as a two-mode Dicke model.
//!
//! The thermodynamic-limit chain is
//! [`params`] → [`meanfield`] → [`fluctuations`] → [`diffusion`], with
//! [`symplectic`] as an independent route to the ground-state populations
//! and [`oracle`] as a finite-N exact-diagonalization check. [`sweep`] runs
//! parameter grids and writes CSV; [`validation`] bundles the runtime
//! invariant checks.
//!
//! Frequencies are angular frequencies with ħ = 1, normally in units of the
//! recoil frequency ω_R.

pub mod diffusion;
pub mod error;
pub mod fluctuations;
pub mod meanfield;
pub mod oracle;
pub mod params;
pub mod sweep;
pub mod symplectic;
pub mod validation;

pub use error::{Error, Result};
pub use params::{reduce_parameters, validate_regime, PhysicalInputs, ReducedParams};
