//! Front end for the `causalrel` binary: configuration, CSV ingestion and
//! the subcommands.

pub mod commands;
pub mod config;
pub mod error;
pub mod ingest;

pub use error::{CliError, Kind, Result};
