//! Command-line experiments for the swimflow solver: simulations, coupling
//! sweeps, solver twins, a self-check suite and the snapshot and CSV formats.

pub mod check;
pub mod commands;
pub mod error;
pub mod experiments;
pub mod snapshot;
pub mod timeseries;

pub use error::{exit, CliError, CliResult};
