//! Batch pipeline around `vitalrates-core`: CSV inputs, parallel projection of
//! every trajectory, quantile summaries, plot tables and a run manifest.

pub mod config;
pub mod error;
pub mod io;
pub mod manifest;
pub mod output;
pub mod quantiles;
pub mod run;
pub mod sample;

pub use config::RunConfig;
pub use error::{PipelineError, Result};
pub use run::{run_pipeline, RunReport};
