//! Experiment runner for sparse-graph mean-field systems: configuration,
//! file formats and the commands behind the `sparsemf` binary.

pub mod config;
pub mod experiments;
pub mod format;
