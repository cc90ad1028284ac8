//! Configuration-driven sweeps over the driven Dicke model.

pub mod app;
pub mod config;
pub mod error;
pub mod output;
pub mod sweep;

pub use config::{Mode, Overrides, SweepSpec};
pub use error::{CliError, Result};
pub use sweep::{run, SweepResult, Value};
