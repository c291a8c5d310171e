//! Experiment configuration, orchestration, aggregation and output files.

pub mod aggregate;
pub mod config;
pub mod experiment;
pub mod instance;
pub mod output;

pub use aggregate::{aggregate, SummaryRow};
pub use config::{Algorithm, Congestion, ExperimentConfig, ModalityRange};
pub use experiment::{run_experiment, run_repetition, ResultRecord};
pub use instance::{repetition_seed, Experiment, Instance};
pub use output::{emit_results, parse_records_csv, records_csv, summary_csv};
