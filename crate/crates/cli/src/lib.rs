//! Configuration, orchestration and file outputs for the `mechstate` binary.

pub mod config;
pub mod error;
pub mod output;
pub mod pipeline;

pub use config::{load_config, resolve, OutcomePolicy, RawConfig, RunConfig, Scenario};
pub use error::RunError;
pub use pipeline::{run_pipeline, RunReport, Summary};
