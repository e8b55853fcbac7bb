//! File formats, run configuration, fixtures and timing.

pub mod bench;
pub mod config;
pub mod fixtures;
pub mod format;

pub use bench::{bench, BenchConfig, BenchReport};
pub use config::{RunConfig, SEED_ENV};
pub use format::{Dataset, FormatError, SerializedSize};
