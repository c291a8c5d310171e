//! The step loop shared by TACTS and every baseline.
//!
//! A [`ControlPolicy`] decides which modality drives each step; the runner does
//! everything else: system best/worst continuations, the modality's selfish
//! edge, the projected path, regret bookkeeping and realized travel time.

use serde::Serialize;

use crate::beliefs::{system_belief_update, BeliefVector, ModalityProfile};
use crate::costmodel::{BprParams, EdgeCosts, FlowState};
use crate::error::{Error, Result};
use crate::network::{Commodity, EdgeId, NodeId, TrafficNetwork};
use crate::routing::{projected_path_with, selfish_best_path_with, system_view_with, PathQuery};
use crate::tacts::{instantaneous_regret, normalize_regret};

/// Everything an episode needs to know about the world.
#[derive(Debug, Clone, Copy)]
pub struct Scenario<'a> {
    pub net: &'a TrafficNetwork,
    pub commodity: &'a Commodity,
    pub true_flows: &'a FlowState,
    pub modalities: &'a [ModalityProfile],
    /// Flow the vehicle itself adds to the edge it traverses (`f_c`).
    pub vehicle_flow: f64,
    pub bpr: BprParams,
    pub max_path_edges: usize,
}

impl Scenario<'_> {
    pub fn origin(&self) -> NodeId {
        self.commodity.origin
    }

    pub fn destination(&self) -> NodeId {
        self.commodity.destination
    }

    /// Step budget used when none is configured.
    pub fn default_max_steps(&self) -> usize {
        2 * self.net.node_count()
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if self.modalities.is_empty() {
            return Err(Error::Precondition(
                "at least one modality is required".into(),
            ));
        }
        if self.max_path_edges == 0 {
            return Err(Error::Precondition(
                "max_path_edges must be at least 1".into(),
            ));
        }
        if !(self.vehicle_flow >= 0.0) {
            return Err(Error::Domain(format!(
                "vehicle flow {} is negative",
                self.vehicle_flow
            )));
        }
        self.bpr.validate()?;
        let n = self.net.node_count();
        if self.commodity.origin.index() >= n || self.commodity.destination.index() >= n {
            return Err(Error::Validation(
                "commodity endpoints are not in the network".into(),
            ));
        }
        Ok(())
    }
}

/// Precomputed edge costs for the system and each modality.
#[derive(Debug, Clone)]
pub struct CostTables {
    pub system: EdgeCosts,
    pub truth: EdgeCosts,
    pub modalities: Vec<EdgeCosts>,
}

impl CostTables {
    pub fn build(s: &Scenario<'_>) -> Result<Self> {
        s.validate()?;
        let system_beliefs = system_belief_update(&BeliefVector::new(), s.true_flows);
        let system = EdgeCosts::from_beliefs(s.net, &system_beliefs, s.vehicle_flow, s.bpr)?;
        let truth = EdgeCosts::from_flows(s.net, s.true_flows, s.vehicle_flow, s.bpr)?;
        let modalities = s
            .modalities
            .iter()
            .map(|m| EdgeCosts::from_beliefs(s.net, &m.beliefs, s.vehicle_flow, s.bpr))
            .collect::<Result<_>>()?;
        Ok(Self {
            system,
            truth,
            modalities,
        })
    }
}

/// What the arbitration system saw after one step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepObservation {
    pub step: usize,
    pub modality: usize,
    pub chosen_edge: EdgeId,
    pub preferred_edge: EdgeId,
    pub regret: f64,
    pub normalized_regret: f64,
}

pub trait ControlPolicy {
    /// Index (into the scenario's modality list) of the next controller.
    fn select(&mut self) -> usize;

    fn observe(&mut self, obs: &StepObservation) -> Result<()>;

    /// Distribution over controllers for the upcoming step.
    fn strategy(&self) -> Vec<f64>;
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepRecord {
    pub step: usize,
    pub active_modality: usize,
    pub chosen_edge: EdgeId,
    pub system_preferred_edge: EdgeId,
    pub regret: f64,
    pub normalized_regret: f64,
    pub strategy_after: Vec<f64>,
    pub realized_step_time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpisodeResult {
    pub steps: Vec<StepRecord>,
    pub path: Vec<EdgeId>,
    pub realized_total_time: f64,
    pub oracle_total_time: Option<f64>,
    pub performance_ratio: Option<f64>,
    /// Sum of unnormalized regrets over all steps.
    pub regret_sum: f64,
    pub failed: bool,
    pub failure: Option<String>,
}

impl EpisodeResult {
    /// Attaches the oracle value; failed episodes get no ratio.
    pub fn with_oracle(mut self, tau_star: f64) -> Self {
        self.oracle_total_time = Some(tau_star);
        self.performance_ratio =
            (!self.failed && tau_star > 0.0).then(|| self.realized_total_time / tau_star);
        self
    }

    /// One JSON object per step.
    pub fn trace_jsonl(&self) -> String {
        let mut out = String::new();
        for s in &self.steps {
            out.push_str(&serde_json::to_string(s).expect("step record serializes"));
            out.push('\n');
        }
        out
    }
}

/// Drives one routing interaction step by step.
pub struct EpisodeRunner<'a, P> {
    scenario: Scenario<'a>,
    costs: CostTables,
    policy: P,
    query: PathQuery,
    max_steps: usize,
    steps: Vec<StepRecord>,
    regret_sum: f64,
    failure: Option<String>,
}

impl<'a, P: ControlPolicy> EpisodeRunner<'a, P> {
    pub fn new(scenario: Scenario<'a>, policy: P, max_steps: Option<usize>) -> Result<Self> {
        let costs = CostTables::build(&scenario)?;
        Ok(Self::with_costs(scenario, costs, policy, max_steps))
    }

    pub fn with_costs(
        scenario: Scenario<'a>,
        costs: CostTables,
        policy: P,
        max_steps: Option<usize>,
    ) -> Self {
        let query = PathQuery::start(
            scenario.origin(),
            scenario.destination(),
            scenario.vehicle_flow,
            scenario.max_path_edges,
        );
        let max_steps = max_steps.unwrap_or_else(|| scenario.default_max_steps());
        Self {
            scenario,
            costs,
            policy,
            query,
            max_steps,
            steps: Vec::new(),
            regret_sum: 0.0,
            failure: None,
        }
    }

    pub fn is_done(&self) -> bool {
        self.failure.is_some() || self.query.at_destination()
    }

    pub fn policy(&self) -> &P {
        &self.policy
    }

    pub fn query(&self) -> &PathQuery {
        &self.query
    }

    fn fail(&mut self, why: String) -> Result<Option<&StepRecord>> {
        self.failure = Some(why);
        Ok(None)
    }

    /// Executes one decision step. Returns `None` once the episode is over.
    pub fn step(&mut self) -> Result<Option<&StepRecord>> {
        if self.is_done() {
            return Ok(None);
        }
        if self.steps.len() >= self.max_steps {
            return self.fail(format!("step budget of {} exhausted", self.max_steps));
        }
        let net = self.scenario.net;
        let view = match system_view_with(&self.query, net, &self.costs.system) {
            Ok(v) => v,
            Err(e @ Error::NoPath { .. }) => return self.fail(e.to_string()),
            Err(e) => return Err(e),
        };
        let preferred = view
            .best
            .first_edge()
            .expect("continuation from a non-destination vertex");

        let modality = self.policy.select();
        let modality_costs = self.costs.modalities.get(modality).ok_or_else(|| {
            Error::Internal(format!(
                "policy selected modality index {modality} out of range"
            ))
        })?;
        let selfish = match selfish_best_path_with(&self.query, net, modality_costs) {
            Ok(p) => p,
            Err(e @ Error::NoPath { .. }) => return self.fail(e.to_string()),
            Err(e) => return Err(e),
        };
        let chosen = selfish
            .first_edge()
            .expect("selfish continuation is nonempty");

        let projected = match projected_path_with(chosen, &self.query, net, &self.costs.system) {
            Ok(p) => p,
            Err(e @ Error::NoPath { .. }) => return self.fail(e.to_string()),
            Err(e) => return Err(e),
        };
        let regret = instantaneous_regret(&projected, &view.best)?;
        let normalized_regret = if view.feasible <= 1 {
            0.0
        } else {
            normalize_regret(regret, &view.worst, &view.best)
        };

        let step = self.steps.len();
        self.policy.observe(&StepObservation {
            step,
            modality,
            chosen_edge: chosen,
            preferred_edge: preferred,
            regret,
            normalized_regret,
        })?;
        self.regret_sum += regret;
        self.query.advance(net, chosen)?;
        self.steps.push(StepRecord {
            step,
            active_modality: modality,
            chosen_edge: chosen,
            system_preferred_edge: preferred,
            regret,
            normalized_regret,
            strategy_after: self.policy.strategy(),
            realized_step_time: self.costs.truth.step_network_time(chosen),
        });
        Ok(self.steps.last())
    }

    pub fn finish(self) -> EpisodeResult {
        let realized_total_time = self.costs.truth.path_network_time(&self.query.prefix);
        EpisodeResult {
            steps: self.steps,
            path: self.query.prefix,
            realized_total_time,
            oracle_total_time: None,
            performance_ratio: None,
            regret_sum: self.regret_sum,
            failed: self.failure.is_some(),
            failure: self.failure,
        }
    }
}

/// Runs `policy` from origin to destination (or failure).
pub fn run_episode<P: ControlPolicy>(
    scenario: Scenario<'_>,
    policy: P,
    max_steps: Option<usize>,
) -> Result<EpisodeResult> {
    let mut runner = EpisodeRunner::new(scenario, policy, max_steps)?;
    while runner.step()?.is_some() {}
    Ok(runner.finish())
}
