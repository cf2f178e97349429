//! File formats, report bundles and the command line around `ceda-core`.

pub mod cli;
pub mod config;
pub mod error;
pub mod export;
pub mod ingest;
pub mod keyvalue;
pub mod svg;

pub use error::{CliError, Result};
