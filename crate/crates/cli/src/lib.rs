//! Command implementations behind the `amrseq` binary.

pub mod config;
pub mod pipeline;
pub mod toy;

pub use config::PipelineConfig;
