//! File formats, configuration, and command implementations behind the
//! `stsae` binary. Everything here is ordinary std code; the model and
//! sampler live in `stsae-core`.

pub mod checkpoint;
pub mod commands;
pub mod config;
pub mod error;
pub mod io;
pub mod parallel;

pub use error::{CliError, ExitCode};
