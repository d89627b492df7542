//! Command-line laboratory for the four-field chemotaxis system: runs
//! experiments from config files, audits them against the theoretical
//! rates and envelopes, and writes deterministic CSV and report files.
//!
//! The numerics live in [`chemolab_core`].

pub mod cmd;
pub mod config;
pub mod error;
pub mod report;
pub mod series;

pub use error::{exit, CliError, Result};
