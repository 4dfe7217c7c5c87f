//! Pipeline orchestration and report emission behind the `mepp` binary.
//!
//! The heavy lifting lives in `mepp-core`; this crate discovers input
//! files, drives ingest → returns → discretize → backtest, and writes
//! the report artifacts plus a manifest that pins the run down to the
//! byte: same config, inputs and seed reproduce identical files
//! regardless of worker count.

pub mod config;
pub mod pipeline;
pub mod report;
pub mod synth;

pub use config::{InputKind, Mode, OutputFormat, RunConfig};
pub use pipeline::{run_pipeline, Manifest, PipelineError, PipelineOutcome};
