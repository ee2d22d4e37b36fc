//! Command-line front end for `wallace-core`: one-shot figure and report
//! commands, plus a local HTTP server speaking the `/v1` kernel protocol.

pub mod args;
pub mod commands;
pub mod protocol;
pub mod serve;

pub use commands::{run, CliError, Outcome};
