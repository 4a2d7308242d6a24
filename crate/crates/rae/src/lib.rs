//! File formats, configuration, checkpoints and experiment drivers around
//! `rae-core`.
//!
//! The `rae` binary wraps these in subcommands; see `rae --help`.

pub mod checkpoint;
pub mod config;
pub mod data;
pub mod error;
pub mod experiments;
pub mod export;
pub mod report;
pub mod runner;

pub use checkpoint::Checkpoint;
pub use config::Config;
pub use error::{Error, Result};
