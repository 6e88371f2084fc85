//! Experiment runner behind the `mieflow` binary.

pub mod config;
pub mod experiments;
pub mod output;
pub mod verify;
