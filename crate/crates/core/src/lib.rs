//! Driven two-level system coupled to a zero-temperature Lorentzian bath.
//!
//! Two dynamics engines are provided: the exact single-excitation amplitude
//! equation under the rotating wave approximation ([`rwa`]) and the
//! hierarchy equations of motion beyond it ([`heom`]). Trace-distance
//! trajectories from either engine feed the non-Markovianity measures in
//! [`measures`], and [`sweep`] evaluates them over parameter grids.
//!
//! All quantities are dimensionless: energies in units of the bath width
//! `lambda`, time as `tau = lambda * t`.

pub mod error;
pub mod qcore;

pub use error::{Error, Result};
pub mod analysis;
pub mod cli;
pub mod engine;
pub mod heom;
pub mod measures;
pub mod ode;
pub mod rwa;
pub mod sweep;
