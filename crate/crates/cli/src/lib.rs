//! File I/O, reports and the end-to-end pipeline around the `z2harm` core.

pub mod error;
pub mod export;
pub mod inputs;
pub mod json;
pub mod pipeline;
pub mod stages;

pub use error::CliError;
pub use pipeline::{run_pipeline, PipelineConfig, RunReport};
