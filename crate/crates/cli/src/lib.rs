//! Configuration, data ingestion and report emission for the replicated
//! Dirichlet-process Bayes-factor experiment.

pub mod config;
pub mod error;
pub mod ingest;
pub mod report;
pub mod run;

pub use config::{bundled_faithful_path, ConfigOverrides, RunConfig};
pub use error::{CliError, Result};
pub use ingest::{ingest_series, parse_series};
pub use report::{ReplicateRecord, RunReport, RunSummary};
pub use run::{run_dp_experiment, run_dp_experiment_on};
