//! IO, file formats, and run orchestration for the navforge suite.
//!
//! The deterministic simulation and training code lives in
//! `navforge-core`; this crate adds the TOML config layer, the checkpoint
//! and trajectory formats, SVG plotting, report assembly, and the command
//! implementations behind the `navforge` binary.

pub mod checkpoint;
pub mod config;
pub mod error;
pub mod manifest;
pub mod report;
pub mod run;
pub mod svg;
pub mod trainlog;
pub mod trajectory;

pub use error::{CliError, Result};
