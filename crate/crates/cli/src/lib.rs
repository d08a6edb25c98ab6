//! Config-driven experiment runner for the light-cone laboratory.

pub mod config;
pub mod describe;
pub mod output;
pub mod run;

pub use config::{Config, ExperimentKind, LoadedConfig, SchemaError};
pub use run::{execute, RunError, RunOutput};
