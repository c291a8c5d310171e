//! Trust-aware arbitration of vehicle control among operational modalities
//! on congestion-priced road networks.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod beliefs;
pub mod costmodel;
pub mod episode;
pub mod error;
pub mod example;
pub mod harness;
pub mod network;
pub mod oracle;
pub mod routing;
pub mod seeds;
pub mod tacts;

pub use baselines::{
    run_doc_episode, run_rcs_episode, run_sc_episode, run_tasr_episode, DocConfig,
};
pub use beliefs::{BeliefVector, FlowBelief, ModalityProfile};
pub use costmodel::{BprParams, EdgeCosts, FlowState};
pub use episode::{run_episode, ControlPolicy, EpisodeResult, EpisodeRunner, Scenario, StepRecord};
pub use error::{Error, Result};
pub use network::{enumerate_commodities, parse_tntp, Commodity, EdgeId, NodeId, TrafficNetwork};
pub use oracle::{compute_oracle, OracleResult};
pub use tacts::{run_tacts_episode, ArbitrationState, TactsConfig};
