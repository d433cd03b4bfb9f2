//! Command-line driver: JSON configuration, the four run modes and the
//! diffusivity sweep.

pub mod commands;
pub mod config;
pub mod sweep;

pub use commands::{execute, Outcome};
pub use config::RunConfig;
