//! Two-atom Rydberg antiblockade simulator.
//!
//! The crate builds the dipole-dipole driven models (Forster, spin-exchange,
//! collective-exchange) and a van der Waals reference, derives their
//! second-order effective Hamiltonians, integrates Lindblad dynamics and runs
//! the gate and steady-state scenarios on top.

pub mod dynamics;
pub mod effective;
pub mod error;
pub mod experiments;
pub mod model;
pub mod qcore;

pub use error::{Error, Result};
