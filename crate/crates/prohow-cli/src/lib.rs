//! Library surface of the pipeline CLI: configuration, stage drivers, and
//! the demo fixture writer. The binary in `main.rs` is a thin wrapper.

pub mod config;
pub mod fixtures;
pub mod stages;

pub use config::PipelineConfig;
pub use stages::{Artifacts, Pipeline};
