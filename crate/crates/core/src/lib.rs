//! Transitionless (counterdiabatic) driving for time-dependent spin systems.
//!
//! `operator` holds the dense Hermitian algebra, `engine` builds the
//! counterdiabatic term of any Hamiltonian, `analytic`, `xy` and `lmg` hold
//! the closed-form models, `schedule` the protocols and `dynamics` the
//! Schrödinger integration and fidelity experiments.

#![no_std]
extern crate alloc;

pub mod analytic;
pub mod dynamics;
pub mod engine;
pub mod error;
pub mod lmg;
pub mod operator;
pub mod schedule;
pub mod xy;

pub use error::{Error, Result};
