//! Exhaustive best controller sequence (`τ⊛`) for small instances.

use std::collections::HashMap;

use serde::Serialize;

use crate::episode::{CostTables, Scenario};
use crate::error::{Error, Result};
use crate::network::{EdgeId, NodeId};
use crate::routing::{selfish_best_path_with, selfish_first_edge_masked, PathQuery};

pub const DEFAULT_EXPANSION_LIMIT: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleResult {
    /// Controlling modality index for each step.
    pub best_sequence: Vec<usize>,
    pub path: Vec<EdgeId>,
    pub tau_star: f64,
    pub states_explored: usize,
    pub expansions: u64,
}

#[derive(Clone, Copy)]
struct Choice {
    value: f64,
    modality: usize,
    edge: EdgeId,
}

struct Search<'a> {
    scenario: &'a Scenario<'a>,
    costs: &'a CostTables,
    memo: HashMap<(NodeId, Vec<u64>), Option<Choice>>,
    expansions: u64,
    limit: u64,
}

fn set_bit(bits: &mut [u64], i: usize) {
    bits[i / 64] |= 1 << (i % 64);
}

impl Search<'_> {
    /// Best remaining network time from `at`; `None` if no controller reaches the destination.
    fn solve(&mut self, at: NodeId, visited: &[u64]) -> Result<Option<f64>> {
        if at == self.scenario.destination() {
            return Ok(Some(0.0));
        }
        let key = (at, visited.to_vec());
        if let Some(c) = self.memo.get(&key) {
            return Ok(c.map(|c| c.value));
        }
        let net = self.scenario.net;
        let mut mask: Vec<bool> = (0..net.node_count())
            .map(|i| visited[i / 64] >> (i % 64) & 1 == 1)
            .collect();
        let mut seen: Vec<EdgeId> = Vec::new();
        let mut best: Option<Choice> = None;
        for (m, costs) in self.costs.modalities.iter().enumerate() {
            self.expansions += 1;
            if self.expansions > self.limit {
                return Err(Error::OracleTooLarge { limit: self.limit });
            }
            let Some(edge) = selfish_first_edge_masked(
                net,
                at,
                self.scenario.destination(),
                &mut mask,
                self.scenario.max_path_edges,
                costs,
            ) else {
                continue;
            };
            if seen.contains(&edge) {
                continue;
            }
            seen.push(edge);
            let head = net.edge(edge).head;
            let mut next = visited.to_vec();
            set_bit(&mut next, head.index());
            let Some(rest) = self.solve(head, &next)? else {
                continue;
            };
            let value = self.costs.system.step_network_time(edge) + rest;
            if best.map_or(true, |b| value < b.value) {
                best = Some(Choice {
                    value,
                    modality: m,
                    edge,
                });
            }
        }
        self.memo.insert(key, best);
        Ok(best.map(|b| b.value))
    }
}

pub fn compute_oracle(scenario: &Scenario<'_>) -> Result<OracleResult> {
    compute_oracle_with_limit(scenario, DEFAULT_EXPANSION_LIMIT)
}

pub fn compute_oracle_with_limit(scenario: &Scenario<'_>, limit: u64) -> Result<OracleResult> {
    let costs = CostTables::build(scenario)?;
    let net = scenario.net;
    let words = net.node_count().div_ceil(64);
    let mut visited = vec![0u64; words];
    set_bit(&mut visited, scenario.origin().index());
    let mut search = Search {
        scenario,
        costs: &costs,
        memo: HashMap::new(),
        expansions: 0,
        limit,
    };
    if search.solve(scenario.origin(), &visited)?.is_none() {
        return Err(Error::NoPath {
            from: net.label(scenario.origin()).to_string(),
            to: net.label(scenario.destination()).to_string(),
        });
    }

    let mut best_sequence = Vec::new();
    let mut path = Vec::new();
    let mut at = scenario.origin();
    while at != scenario.destination() {
        let choice = search
            .memo
            .get(&(at, visited.clone()))
            .copied()
            .flatten()
            .ok_or_else(|| {
                Error::Internal("oracle reconstruction left the solved states".into())
            })?;
        best_sequence.push(choice.modality);
        path.push(choice.edge);
        at = net.edge(choice.edge).head;
        set_bit(&mut visited, at.index());
    }
    Ok(OracleResult {
        best_sequence,
        tau_star: costs.truth.path_network_time(&path),
        path,
        states_explored: search.memo.len(),
        expansions: search.expansions,
    })
}

/// Replays a controller sequence and returns its path and realized total time.
pub fn evaluate_sequence(
    scenario: &Scenario<'_>,
    sequence: &[usize],
) -> Result<(Vec<EdgeId>, f64)> {
    let costs = CostTables::build(scenario)?;
    let mut q = PathQuery::start(
        scenario.origin(),
        scenario.destination(),
        scenario.vehicle_flow,
        scenario.max_path_edges,
    );
    for &m in sequence {
        if q.at_destination() {
            return Err(Error::Precondition(
                "sequence is longer than the walk".into(),
            ));
        }
        let mc = costs
            .modalities
            .get(m)
            .ok_or_else(|| Error::Precondition(format!("modality index {m} out of range")))?;
        let e = selfish_best_path_with(&q, scenario.net, mc)?
            .first_edge()
            .expect("nonempty continuation");
        q.advance(scenario.net, e)?;
    }
    if !q.at_destination() {
        return Err(Error::Precondition(
            "sequence ends before the destination".into(),
        ));
    }
    let total = costs.truth.path_network_time(&q.prefix);
    Ok((q.prefix, total))
}
