//! Command-line pipeline for iterative consensus clustering: matrix
//! ingestion, run configuration, estimation and voting, and report files.

pub mod config;
mod error;
pub mod io;
pub mod pipeline;
pub mod report;

pub use error::{CliError, Result, SCHEMA_VERSION};
