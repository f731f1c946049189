//! Files and command line for the wearable valence pipeline.
//!
//! [`formats`] reads and writes the CSV files, [`commands`] runs the
//! `synth`, `extract`, `correlate`, `classify` and `report` subcommands, and
//! the `valence-pipe` binary wraps them with argument parsing.

pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod formats;

pub use commands::{compute, run, Output};
pub use error::PipeError;
