//! Library side of the `mhc` command: each subcommand as a function, so the
//! integration and acceptance suites can drive them without a subprocess.

pub mod bench;
pub mod commands;
pub mod error;

pub use error::{CliError, Result};
