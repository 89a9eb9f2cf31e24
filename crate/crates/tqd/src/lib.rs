//! Experiment configuration, CSV output and the verification report behind
//! the `tqd` binary.

pub mod config;
pub mod output;
pub mod run;
pub mod verify;
