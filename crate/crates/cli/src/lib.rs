//! Subcommand implementations behind the `altqa` binary.

pub mod commands;
pub mod config;
mod exit;
mod io;

pub use exit::{exit_code, Failure};
pub use io::LineError;
