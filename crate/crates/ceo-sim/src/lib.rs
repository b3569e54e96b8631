//! Experiment harness and command-line front end for the `ceo-core` toolkit.
//!
//! Configs are flat TOML files; outputs are CSV tables, JSON reports and a
//! run manifest carrying the config hash.

pub mod cli;
pub mod config;
pub mod error;
pub mod harness;
pub mod io;
pub mod presets;
pub mod verify;

pub use error::{Result, SimError};
