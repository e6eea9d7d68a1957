//! Experiment drivers behind the `variograph` command-line tool.
//!
//! [`config`] holds the full set of experiment knobs with a plain-text
//! round trip, so every run can drop a `config.txt` that reproduces it
//! exactly. [`experiments`] wires those knobs into the estimation library
//! and writes the result files.

pub mod config;
pub mod experiments;

pub use config::ExperimentConfig;
