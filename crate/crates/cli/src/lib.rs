//! Experiment runner behind the `tensorcast` binary.

pub mod commands;
pub mod config;
