//! BPR volume-delay costs and the travel-time aggregates built on them.

use serde::{Deserialize, Serialize};

use crate::beliefs::{BeliefVector, FlowBelief};
use crate::error::{Error, Result};
use crate::network::{EdgeId, EdgeRecord, TrafficNetwork};

/// Shape (`lambda`) and exponent (`beta`) of the BPR curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BprParams {
    pub lambda: f64,
    pub beta: f64,
}

impl Default for BprParams {
    fn default() -> Self {
        Self {
            lambda: 0.15,
            beta: 4.0,
        }
    }
}

impl BprParams {
    pub fn new(lambda: f64, beta: f64) -> Result<Self> {
        let p = Self { lambda, beta };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0) || !(self.beta >= 1.0) {
            return Err(Error::Domain(format!(
                "BPR parameters need lambda >= 0 and beta >= 1, got lambda={} beta={}",
                self.lambda, self.beta
            )));
        }
        Ok(())
    }
}

/// Existing flow on every edge of a network, indexed by edge id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowState {
    flows: Vec<f64>,
}

impl FlowState {
    pub fn new(net: &TrafficNetwork, flows: Vec<f64>) -> Result<Self> {
        if flows.len() != net.edge_count() {
            return Err(Error::Validation(format!(
                "flow state has {} entries for {} edges",
                flows.len(),
                net.edge_count()
            )));
        }
        if let Some(i) = flows.iter().position(|f| !(*f >= 0.0) || !f.is_finite()) {
            return Err(Error::Validation(format!(
                "edge {i} has invalid flow {}",
                flows[i]
            )));
        }
        Ok(Self { flows })
    }

    /// Every edge loaded at `multiplier` times its capacity.
    pub fn scaled_capacity(net: &TrafficNetwork, multiplier: f64) -> Result<Self> {
        Self::new(
            net,
            net.edges()
                .iter()
                .map(|e| e.capacity * multiplier)
                .collect(),
        )
    }

    pub fn flow(&self, e: EdgeId) -> f64 {
        self.flows[e.index()]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.flows
    }

    pub fn len(&self) -> usize {
        self.flows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.flows.is_empty()
    }
}

/// `t_ff * (1 + lambda * (flow / capacity)^beta)`.
pub fn bpr_time(free_flow_time: f64, flow: f64, capacity: f64, p: BprParams) -> Result<f64> {
    if !(capacity > 0.0) {
        return Err(Error::Domain(format!(
            "capacity must be positive, got {capacity}"
        )));
    }
    if !(flow >= 0.0) || !(free_flow_time >= 0.0) {
        return Err(Error::Domain(format!(
            "flow and free-flow time must be nonnegative, got flow={flow} t_ff={free_flow_time}"
        )));
    }
    Ok(raw_bpr(free_flow_time, flow, capacity, p))
}

#[inline]
fn raw_bpr(free_flow_time: f64, flow: f64, capacity: f64, p: BprParams) -> f64 {
    free_flow_time * (1.0 + p.lambda * (flow / capacity).powf(p.beta))
}

/// Expected traversal time of `edge` under `belief` with `added_flow` on top of
/// the believed existing flow. `added_flow = 0` gives the plain expected time.
pub fn expected_edge_time(
    belief: &FlowBelief,
    edge: &EdgeRecord,
    added_flow: f64,
    p: BprParams,
) -> Result<f64> {
    belief
        .validate()
        .map_err(|msg| Error::Validation(format!("edge {}: {msg}", edge.id.index())))?;
    if !(added_flow >= 0.0) {
        return Err(Error::Domain(format!(
            "added flow must be nonnegative, got {added_flow}"
        )));
    }
    Ok(expected_unchecked(belief, edge, added_flow, p))
}

fn expected_unchecked(
    belief: &FlowBelief,
    edge: &EdgeRecord,
    added_flow: f64,
    p: BprParams,
) -> f64 {
    belief
        .iter()
        .map(|(flow, prob)| {
            raw_bpr(edge.free_flow_time, flow + added_flow, edge.capacity, p) * prob
        })
        .sum()
}

/// Expected network time of one step in which the vehicle traverses `chosen`.
pub fn instantaneous_network_time(
    net: &TrafficNetwork,
    beliefs: &BeliefVector,
    chosen: EdgeId,
    vehicle_flow: f64,
    p: BprParams,
) -> Result<f64> {
    if chosen.index() >= net.edge_count() {
        return Err(Error::Validation(format!(
            "unknown edge {}",
            chosen.index()
        )));
    }
    let mut total = 0.0;
    for e in net.edges() {
        let belief = beliefs.get(e.id)?;
        let added = if e.id == chosen { vehicle_flow } else { 0.0 };
        total += expected_edge_time(belief, e, added, p)?;
    }
    Ok(total)
}

fn check_connected(net: &TrafficNetwork, path: &[EdgeId]) -> Result<()> {
    if let Some(first) = path.first() {
        let start = net
            .edges()
            .get(first.index())
            .ok_or_else(|| Error::Validation(format!("unknown edge {}", first.index())))?
            .tail;
        net.path_end(start, path)?;
    }
    Ok(())
}

/// Expected total network time along `path` with beliefs held fixed.
pub fn path_network_time(
    net: &TrafficNetwork,
    beliefs: &BeliefVector,
    path: &[EdgeId],
    vehicle_flow: f64,
    p: BprParams,
) -> Result<f64> {
    check_connected(net, path)?;
    path.iter()
        .map(|&e| instantaneous_network_time(net, beliefs, e, vehicle_flow, p))
        .sum()
}

/// Expected travel time of the vehicle itself along `path`.
pub fn path_vehicle_time(
    net: &TrafficNetwork,
    beliefs: &BeliefVector,
    path: &[EdgeId],
    vehicle_flow: f64,
    p: BprParams,
) -> Result<f64> {
    check_connected(net, path)?;
    path.iter()
        .map(|&e| expected_edge_time(beliefs.get(e)?, net.edge(e), vehicle_flow, p))
        .sum()
}

/// Realized total network time when the vehicle drives `path` through the
/// true flows: the vehicle's flow loads only the edge it is on at each step.
pub fn realized_network_time(
    net: &TrafficNetwork,
    true_flows: &FlowState,
    path: &[EdgeId],
    vehicle_flow: f64,
    p: BprParams,
) -> Result<f64> {
    check_connected(net, path)?;
    let costs = EdgeCosts::from_flows(net, true_flows, vehicle_flow, p)?;
    Ok(costs.path_network_time(path))
}

/// Per-edge expected times under one belief vector, precomputed for search.
///
/// `idle[e]` is the expected time with no vehicle, `loaded[e]` with the
/// vehicle's flow added. A step across `e` costs the network
/// `loaded[e] + sum(idle) - idle[e]`.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeCosts {
    idle: Vec<f64>,
    loaded: Vec<f64>,
    idle_total: f64,
}

impl EdgeCosts {
    pub fn from_beliefs(
        net: &TrafficNetwork,
        beliefs: &BeliefVector,
        vehicle_flow: f64,
        p: BprParams,
    ) -> Result<Self> {
        beliefs.validate(net)?;
        if !(vehicle_flow >= 0.0) {
            return Err(Error::Domain(format!(
                "vehicle flow must be nonnegative, got {vehicle_flow}"
            )));
        }
        let mut idle = Vec::with_capacity(net.edge_count());
        let mut loaded = Vec::with_capacity(net.edge_count());
        for e in net.edges() {
            let b = beliefs.get(e.id)?;
            idle.push(expected_unchecked(b, e, 0.0, p));
            loaded.push(expected_unchecked(b, e, vehicle_flow, p));
        }
        Ok(Self::assemble(idle, loaded))
    }

    pub fn from_flows(
        net: &TrafficNetwork,
        flows: &FlowState,
        vehicle_flow: f64,
        p: BprParams,
    ) -> Result<Self> {
        if flows.len() != net.edge_count() {
            return Err(Error::Validation(format!(
                "flow state has {} entries for {} edges",
                flows.len(),
                net.edge_count()
            )));
        }
        if !(vehicle_flow >= 0.0) {
            return Err(Error::Domain(format!(
                "vehicle flow must be nonnegative, got {vehicle_flow}"
            )));
        }
        let (idle, loaded) = net
            .edges()
            .iter()
            .map(|e| {
                let f = flows.flow(e.id);
                (
                    raw_bpr(e.free_flow_time, f, e.capacity, p),
                    raw_bpr(e.free_flow_time, f + vehicle_flow, e.capacity, p),
                )
            })
            .unzip();
        Ok(Self::assemble(idle, loaded))
    }

    fn assemble(idle: Vec<f64>, loaded: Vec<f64>) -> Self {
        let idle_total = idle.iter().sum();
        Self {
            idle,
            loaded,
            idle_total,
        }
    }

    #[inline]
    pub fn vehicle_time(&self, e: EdgeId) -> f64 {
        self.loaded[e.index()]
    }

    #[inline]
    pub fn idle_time(&self, e: EdgeId) -> f64 {
        self.idle[e.index()]
    }

    #[inline]
    pub fn step_network_time(&self, e: EdgeId) -> f64 {
        self.loaded[e.index()] + (self.idle_total - self.idle[e.index()])
    }

    pub fn idle_network_time(&self) -> f64 {
        self.idle_total
    }

    pub fn path_network_time(&self, path: &[EdgeId]) -> f64 {
        path.iter()
            .fold(0.0, |acc, &e| acc + self.step_network_time(e))
    }

    pub fn path_vehicle_time(&self, path: &[EdgeId]) -> f64 {
        path.iter().fold(0.0, |acc, &e| acc + self.vehicle_time(e))
    }
}
