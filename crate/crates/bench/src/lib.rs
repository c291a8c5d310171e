//! Shared fixtures for the benchmarks.

use std::path::PathBuf;

use tacts_core::harness::{Algorithm, Congestion, Experiment, ExperimentConfig};

pub fn sioux_falls_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/SiouxFalls_net.tntp")
}

/// Sioux Falls experiment at the given congestion with `f_c = 10`.
pub fn sioux_falls(congestion: Congestion) -> Experiment {
    Experiment::load(ExperimentConfig {
        network_path: sioux_falls_path(),
        congestion_level: congestion,
        algorithms: vec![Algorithm::Tacts],
        ..ExperimentConfig::default()
    })
    .expect("bundled network loads")
}
