//! File formats, run configuration and the command-line driver for
//! `anyk-core`.

pub mod cli;
pub mod config;
pub mod error;
pub mod io;
pub mod runner;

pub use config::{DataSource, DioidSpec, Projection, QuerySource, RunConfig, ShapeKind};
pub use error::CliError;
