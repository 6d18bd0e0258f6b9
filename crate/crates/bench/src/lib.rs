//! Experiment harness: configuration, replication runner, metrics, report
//! emission and the self-check suites behind the `cdnn` command.

pub mod config;
mod error;
pub mod metrics;
pub mod report;
pub mod runner;
pub mod verify;

pub use config::{DgpSource, EstimatorKind, ExperimentConfig, MetricScope};
pub use error::{BenchError, Result};
pub use report::MetricsReport;
pub use runner::run;
