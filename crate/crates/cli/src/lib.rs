//! Command-line pipeline around `shapelet-core`.
//!
//! Each stage is its own subcommand and writes an inspectable artifact:
//! dataset CSV, shapelet JSON, transform CSV, model JSON, predictions CSV
//! and metrics JSON. JSON artifacts and the `.meta.json` sidecars of CSV
//! files record the producing config's hash and the input's SHA-256, and
//! later stages refuse artifacts built from a different shapelet set.
//!
//! Exit codes: 0 ok, 1 IO error, 2 validation error, 3 no shapelet found,
//! 4 malformed input.

pub mod artifact;
pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod io;
pub mod number;
pub mod synth;

pub use cli::Cli;
pub use commands::execute;
pub use error::{CliError, Result};
