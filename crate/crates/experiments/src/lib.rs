//! Experiment harness for the Kirchhoff workbench.
//!
//! Every command takes an [`ExperimentConfig`], runs deterministically, and
//! returns a JSON report wrapped in a common [`Envelope`] carrying the schema
//! version, build id and config hash.

pub mod config;
pub mod conjugacy;
pub mod energy;
pub mod error;
pub mod report;
pub mod setup;
pub mod simulate;
pub mod sweep;
pub mod tempting;
pub mod verify;

pub use config::{ExperimentConfig, Representation};
pub use error::{ExitCode, ExperimentError};
pub use report::Envelope;

/// Version of every JSON report and CSV layout written by the harness.
pub const SCHEMA_VERSION: u32 = 1;

/// Crate version plus the short commit hash at build time, or `unknown`.
pub const BUILD_ID: &str = env!("KIRCHHOFF_BUILD_ID");
