//! Steady-state Gaussian states of a three-mode optomechanical system (two
//! optically coupled cavities with saturable gain/loss driving one mechanical
//! resonator), with tripartite entanglement and relative-entropy coherence.
//!
//! The pipeline for one parameter point is
//! [`model::steady_state`] → [`dynamics::build_drift`] →
//! [`dynamics::solve_lyapunov`] → [`measures::MeasureSet::evaluate`];
//! [`pipeline::evaluate_point`] chains them and classifies the outcome.

pub mod dynamics;
pub mod error;
pub mod measures;
pub mod model;
pub mod pipeline;
#[cfg(test)]
mod properties;
pub mod sweep;
pub mod validate;

pub use error::{Error, Result};
