//! Exhaustive capped simple-path search under arbitrary beliefs.
//!
//! Every search enumerates the simple paths from the vehicle's current vertex
//! to its destination that avoid the vertices it has already visited and have
//! at most `max_edges` edges. Paths are visited in lexicographic edge-id order
//! and only a strictly better score replaces the incumbent, so ties resolve to
//! the lexicographically smallest edge sequence.

use serde::{Deserialize, Serialize};

use crate::beliefs::BeliefVector;
use crate::costmodel::{BprParams, EdgeCosts};
use crate::error::{Error, Result};
use crate::network::{EdgeId, NodeId, TrafficNetwork};

/// Where the vehicle is and how it got there.
#[derive(Debug, Clone, PartialEq)]
pub struct PathQuery {
    pub origin: NodeId,
    pub current: NodeId,
    pub destination: NodeId,
    pub prefix: Vec<EdgeId>,
    pub vehicle_flow: f64,
    /// Cap on the number of edges of any continuation.
    pub max_edges: usize,
}

impl PathQuery {
    pub fn start(origin: NodeId, destination: NodeId, vehicle_flow: f64, max_edges: usize) -> Self {
        Self {
            origin,
            current: origin,
            destination,
            prefix: Vec::new(),
            vehicle_flow,
            max_edges,
        }
    }

    /// Builds a query after `prefix` has been driven from `origin`.
    pub fn with_prefix(
        net: &TrafficNetwork,
        origin: NodeId,
        destination: NodeId,
        prefix: Vec<EdgeId>,
        vehicle_flow: f64,
        max_edges: usize,
    ) -> Result<Self> {
        let mut q = Self::start(origin, destination, vehicle_flow, max_edges);
        for e in prefix {
            q.advance(net, e)?;
        }
        Ok(q)
    }

    /// Moves the vehicle across `edge`, keeping the walk simple.
    pub fn advance(&mut self, net: &TrafficNetwork, edge: EdgeId) -> Result<()> {
        let rec = net
            .edges()
            .get(edge.index())
            .ok_or_else(|| Error::Validation(format!("unknown edge {}", edge.index())))?;
        if rec.tail != self.current {
            return Err(Error::Validation(format!(
                "edge {} does not leave {}",
                net.edge_label(edge),
                net.label(self.current)
            )));
        }
        if self.visited(net).contains(&rec.head) {
            return Err(Error::Validation(format!(
                "edge {} revisits {}",
                net.edge_label(edge),
                net.label(rec.head)
            )));
        }
        self.prefix.push(edge);
        self.current = rec.head;
        Ok(())
    }

    pub fn at_destination(&self) -> bool {
        self.current == self.destination
    }

    /// Vertices already on the walk, including the current one.
    pub fn visited(&self, net: &TrafficNetwork) -> Vec<NodeId> {
        let mut out = vec![self.origin];
        out.extend(self.prefix.iter().map(|e| net.edge(*e).head));
        out
    }

    fn blocked_mask(&self, net: &TrafficNetwork) -> Vec<bool> {
        let mut mask = vec![false; net.node_count()];
        for v in self.visited(net) {
            mask[v.index()] = true;
        }
        mask
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredPath {
    pub edges: Vec<EdgeId>,
    pub score: f64,
}

impl ScoredPath {
    pub fn first_edge(&self) -> Option<EdgeId> {
        self.edges.first().copied()
    }
}

/// Best and worst system continuations from one decision point.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemView {
    pub best: ScoredPath,
    pub worst: ScoredPath,
    /// Number of feasible continuations that were scored.
    pub feasible: usize,
}

struct Extremes {
    best: Option<ScoredPath>,
    worst: Option<ScoredPath>,
    count: usize,
}

fn search<F: Fn(EdgeId) -> f64>(
    net: &TrafficNetwork,
    start: NodeId,
    destination: NodeId,
    blocked: &mut [bool],
    max_edges: usize,
    cost: &F,
    track_worst: bool,
) -> Extremes {
    struct Ctx<'a, F> {
        net: &'a TrafficNetwork,
        destination: NodeId,
        max_edges: usize,
        cost: &'a F,
        track_worst: bool,
        stack: Vec<EdgeId>,
        out: Extremes,
    }

    fn dfs<F: Fn(EdgeId) -> f64>(ctx: &mut Ctx<'_, F>, at: NodeId, acc: f64, blocked: &mut [bool]) {
        if at == ctx.destination {
            ctx.out.count += 1;
            if ctx.out.best.as_ref().map_or(true, |b| acc < b.score) {
                ctx.out.best = Some(ScoredPath {
                    edges: ctx.stack.clone(),
                    score: acc,
                });
            }
            if ctx.track_worst && ctx.out.worst.as_ref().map_or(true, |w| acc > w.score) {
                ctx.out.worst = Some(ScoredPath {
                    edges: ctx.stack.clone(),
                    score: acc,
                });
            }
            return;
        }
        if ctx.stack.len() >= ctx.max_edges {
            return;
        }
        for &e in ctx.net.out_edges(at) {
            let head = ctx.net.edge(e).head;
            if blocked[head.index()] {
                continue;
            }
            blocked[head.index()] = true;
            ctx.stack.push(e);
            let next = acc + (ctx.cost)(e);
            dfs(ctx, head, next, blocked);
            ctx.stack.pop();
            blocked[head.index()] = false;
        }
    }

    let mut ctx = Ctx {
        net,
        destination,
        max_edges,
        cost,
        track_worst,
        stack: Vec::new(),
        out: Extremes {
            best: None,
            worst: None,
            count: 0,
        },
    };
    let was = blocked[start.index()];
    blocked[start.index()] = true;
    dfs(&mut ctx, start, 0.0, blocked);
    blocked[start.index()] = was;
    ctx.out
}

fn no_path(net: &TrafficNetwork, from: NodeId, to: NodeId) -> Error {
    Error::NoPath {
        from: net.label(from).to_string(),
        to: net.label(to).to_string(),
    }
}

/// The modality's selfish route: minimum believed vehicle travel time.
pub fn selfish_best_path_with(
    q: &PathQuery,
    net: &TrafficNetwork,
    modality_costs: &EdgeCosts,
) -> Result<ScoredPath> {
    let mut mask = q.blocked_mask(net);
    search(
        net,
        q.current,
        q.destination,
        &mut mask,
        q.max_edges,
        &|e| modality_costs.vehicle_time(e),
        false,
    )
    .best
    .ok_or_else(|| no_path(net, q.current, q.destination))
}

/// Selfish first edge from `at` with an explicit visited mask.
pub(crate) fn selfish_first_edge_masked(
    net: &TrafficNetwork,
    at: NodeId,
    destination: NodeId,
    blocked: &mut [bool],
    max_edges: usize,
    modality_costs: &EdgeCosts,
) -> Option<EdgeId> {
    search(
        net,
        at,
        destination,
        blocked,
        max_edges,
        &|e| modality_costs.vehicle_time(e),
        false,
    )
    .best
    .and_then(|p| p.first_edge())
}

/// Minimum- and maximum-network-time continuations in one pass.
pub fn system_view_with(
    q: &PathQuery,
    net: &TrafficNetwork,
    system_costs: &EdgeCosts,
) -> Result<SystemView> {
    let mut mask = q.blocked_mask(net);
    let ex = search(
        net,
        q.current,
        q.destination,
        &mut mask,
        q.max_edges,
        &|e| system_costs.step_network_time(e),
        true,
    );
    match (ex.best, ex.worst) {
        (Some(best), Some(worst)) => Ok(SystemView {
            best,
            worst,
            feasible: ex.count,
        }),
        _ => Err(no_path(net, q.current, q.destination)),
    }
}

/// Commits `committed` and continues along the system-optimal path from its head.
/// The continuation is capped so that the whole projected path respects `max_edges`.
pub fn projected_path_with(
    committed: EdgeId,
    q: &PathQuery,
    net: &TrafficNetwork,
    system_costs: &EdgeCosts,
) -> Result<ScoredPath> {
    if !net.out_edges(q.current).contains(&committed) {
        return Err(Error::Precondition(format!(
            "edge {} does not leave {}",
            net.edge_label(committed),
            net.label(q.current)
        )));
    }
    let head = net.edge(committed).head;
    let mut mask = q.blocked_mask(net);
    if mask[head.index()] {
        return Err(no_path(net, head, q.destination));
    }
    let mut edges = vec![committed];
    if head != q.destination {
        if q.max_edges <= 1 {
            return Err(no_path(net, head, q.destination));
        }
        mask[q.current.index()] = true;
        let rest = search(
            net,
            head,
            q.destination,
            &mut mask,
            q.max_edges - 1,
            &|e| system_costs.step_network_time(e),
            false,
        )
        .best
        .ok_or_else(|| no_path(net, head, q.destination))?;
        edges.extend(rest.edges);
    }
    let score = system_costs.path_network_time(&edges);
    Ok(ScoredPath { edges, score })
}

pub fn selfish_best_path(
    q: &PathQuery,
    modality_beliefs: &BeliefVector,
    net: &TrafficNetwork,
    p: BprParams,
) -> Result<ScoredPath> {
    let costs = EdgeCosts::from_beliefs(net, modality_beliefs, q.vehicle_flow, p)?;
    selfish_best_path_with(q, net, &costs)
}

pub fn system_best_path(
    q: &PathQuery,
    system_beliefs: &BeliefVector,
    net: &TrafficNetwork,
    p: BprParams,
) -> Result<ScoredPath> {
    let costs = EdgeCosts::from_beliefs(net, system_beliefs, q.vehicle_flow, p)?;
    Ok(system_view_with(q, net, &costs)?.best)
}

pub fn system_worst_path(
    q: &PathQuery,
    system_beliefs: &BeliefVector,
    net: &TrafficNetwork,
    p: BprParams,
) -> Result<ScoredPath> {
    let costs = EdgeCosts::from_beliefs(net, system_beliefs, q.vehicle_flow, p)?;
    Ok(system_view_with(q, net, &costs)?.worst)
}

pub fn projected_path(
    committed: EdgeId,
    q: &PathQuery,
    system_beliefs: &BeliefVector,
    net: &TrafficNetwork,
    p: BprParams,
) -> Result<ScoredPath> {
    let costs = EdgeCosts::from_beliefs(net, system_beliefs, q.vehicle_flow, p)?;
    projected_path_with(committed, q, net, &costs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::costmodel::path_network_time;
    use crate::network::NetworkBuilder;

    fn p() -> BprParams {
        BprParams::default()
    }

    /// a -> {b, c} -> d with a heavily loaded a->c.
    fn diamond() -> (TrafficNetwork, BeliefVector) {
        let mut b = NetworkBuilder::new();
        b.edge("a", "b", 2.0, 10.0)
            .edge("a", "c", 2.0, 10.0)
            .edge("b", "d", 2.0, 10.0)
            .edge("c", "d", 2.0, 10.0);
        let net = b.build().unwrap();
        let bv = BeliefVector::point_masses(&[1.0, 25.0, 1.0, 1.0]);
        (net, bv)
    }

    fn query(net: &TrafficNetwork, from: &str, to: &str, fc: f64) -> PathQuery {
        PathQuery::start(
            net.node_by_label(from).unwrap(),
            net.node_by_label(to).unwrap(),
            fc,
            5,
        )
    }

    /// Brute-force reference: all simple paths with their literal scores.
    fn all_paths(
        net: &TrafficNetwork,
        q: &PathQuery,
        bv: &BeliefVector,
    ) -> Vec<(Vec<EdgeId>, f64)> {
        let cs = crate::network::enumerate_commodities(net, q.max_edges);
        cs.into_iter()
            .filter(|c| c.origin == q.current && c.destination == q.destination)
            .flat_map(|c| c.candidate_paths)
            .map(|path| {
                let s = path_network_time(net, bv, &path, q.vehicle_flow, p()).unwrap();
                (path, s)
            })
            .collect()
    }

    #[test]
    fn worst_path_runs_through_the_loaded_edge() {
        let (net, bv) = diamond();
        let q = query(&net, "a", "d", 1.0);
        let worst = system_worst_path(&q, &bv, &net, p()).unwrap();
        let best = system_best_path(&q, &bv, &net, p()).unwrap();
        let brute = all_paths(&net, &q, &bv);
        let max = brute
            .iter()
            .cloned()
            .fold((vec![], f64::MIN), |m, x| if x.1 > m.1 { x } else { m });
        let min = brute
            .iter()
            .cloned()
            .fold((vec![], f64::MAX), |m, x| if x.1 < m.1 { x } else { m });
        assert_eq!(worst.edges, max.0);
        assert_eq!(worst.edges[0], net.edge_by_endpoints("a", "c").unwrap());
        assert_eq!(best.edges, min.0);
        assert!((worst.score - max.1).abs() < 1e-9);
        assert!((best.score - min.1).abs() < 1e-9);
    }

    #[test]
    fn shortest_step_path_wins_with_zero_vehicle_flow() {
        // Diamond plus a one-edge shortcut; with f_c = 0 every step costs the same.
        let mut b = NetworkBuilder::new();
        b.edge("a", "b", 1.0, 10.0)
            .edge("b", "d", 1.0, 10.0)
            .edge("a", "c", 1.0, 10.0)
            .edge("c", "d", 1.0, 10.0)
            .edge("a", "d", 5.0, 10.0);
        let net = b.build().unwrap();
        let bv = BeliefVector::point_masses(&[3.0; 5]);
        let q = query(&net, "a", "d", 0.0);
        let best = system_best_path(&q, &bv, &net, p()).unwrap();
        let brute = all_paths(&net, &q, &bv);
        let fewest = brute.iter().min_by_key(|(path, _)| path.len()).unwrap();
        assert_eq!(best.edges, fewest.0);
        assert_eq!(best.edges, vec![net.edge_by_endpoints("a", "d").unwrap()]);
    }

    #[test]
    fn parallel_edge_tie_goes_to_smaller_id() {
        let mut b = NetworkBuilder::new();
        b.edge("a", "b", 1.0, 10.0).edge("a", "b", 1.0, 10.0);
        let net = b.build().unwrap();
        let bv = BeliefVector::point_masses(&[2.0, 2.0]);
        let q = query(&net, "a", "b", 1.0);
        assert_eq!(
            selfish_best_path(&q, &bv, &net, p()).unwrap().edges,
            vec![EdgeId(0)]
        );
        assert_eq!(
            system_best_path(&q, &bv, &net, p()).unwrap().edges,
            vec![EdgeId(0)]
        );
        assert_eq!(
            system_worst_path(&q, &bv, &net, p()).unwrap().edges,
            vec![EdgeId(0)]
        );
    }

    #[test]
    fn single_path_network() {
        let mut b = NetworkBuilder::new();
        b.edge("a", "b", 1.0, 10.0).edge("b", "c", 4.0, 3.0);
        let net = b.build().unwrap();
        let bv = BeliefVector::point_masses(&[50.0, 0.0]);
        let q = query(&net, "a", "c", 3.0);
        let best = system_best_path(&q, &bv, &net, p()).unwrap();
        let worst = system_worst_path(&q, &bv, &net, p()).unwrap();
        let selfish = selfish_best_path(&q, &bv, &net, p()).unwrap();
        let proj = projected_path(EdgeId(0), &q, &bv, &net, p()).unwrap();
        assert_eq!(best, worst);
        assert_eq!(selfish.edges, best.edges);
        assert_eq!(proj.score, best.score);
    }

    #[test]
    fn committing_the_best_first_edge_reproduces_best() {
        let (net, bv) = diamond();
        let q = query(&net, "a", "d", 4.0);
        let best = system_best_path(&q, &bv, &net, p()).unwrap();
        let proj = projected_path(best.edges[0], &q, &bv, &net, p()).unwrap();
        assert_eq!(proj.score, best.score);
        assert_eq!(proj.edges, best.edges);
    }

    #[test]
    fn unreachable_and_dead_ends() {
        let mut b = NetworkBuilder::new();
        b.edge("a", "b", 1.0, 10.0)
            .edge("a", "x", 1.0, 10.0)
            .edge("b", "c", 1.0, 10.0);
        let net = b.build().unwrap();
        let bv = BeliefVector::point_masses(&[0.0; 3]);
        let q = query(&net, "c", "a", 1.0);
        assert!(matches!(
            selfish_best_path(&q, &bv, &net, p()),
            Err(Error::NoPath { .. })
        ));
        let q = query(&net, "a", "c", 1.0);
        let dead = net.edge_by_endpoints("a", "x").unwrap();
        assert!(matches!(
            projected_path(dead, &q, &bv, &net, p()),
            Err(Error::NoPath { .. })
        ));
        assert!(matches!(
            projected_path(EdgeId(2), &q, &bv, &net, p()),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn visited_vertices_are_avoided() {
        // a -> b -> c -> d and a shortcut c -> a -> ... is blocked once a is visited.
        let mut b = NetworkBuilder::new();
        b.edge("a", "b", 1.0, 10.0)
            .edge("b", "c", 1.0, 10.0)
            .edge("c", "a", 1.0, 10.0)
            .edge("a", "d", 1.0, 10.0)
            .edge("c", "d", 9.0, 10.0);
        let net = b.build().unwrap();
        let bv = BeliefVector::point_masses(&[0.0; 5]);
        let (a, d) = (
            net.node_by_label("a").unwrap(),
            net.node_by_label("d").unwrap(),
        );
        let q = PathQuery::with_prefix(&net, a, d, vec![EdgeId(0), EdgeId(1)], 1.0, 5).unwrap();
        let s = selfish_best_path(&q, &bv, &net, p()).unwrap();
        assert_eq!(s.edges, vec![net.edge_by_endpoints("c", "d").unwrap()]);
        assert!(
            PathQuery::with_prefix(&net, a, d, vec![EdgeId(0), EdgeId(1), EdgeId(2)], 1.0, 5)
                .is_err()
        );
    }

    mod props {
        use super::*;
        use crate::network::enumerate_commodities;
        use proptest::prelude::*;

        fn random_net(n: usize, arcs: &[(usize, usize, f64, f64)]) -> Option<TrafficNetwork> {
            let mut b = NetworkBuilder::new();
            for i in 0..n {
                b.node(&format!("v{i}"));
            }
            for &(t, h, ff, c) in arcs {
                if t % n != h % n {
                    b.edge(&format!("v{}", t % n), &format!("v{}", h % n), ff, c);
                }
            }
            let net = b.build().ok()?;
            (net.edge_count() > 0).then_some(net)
        }

        proptest! {
            #[test]
            fn search_invariants(
                n in 3usize..7,
                arcs in proptest::collection::vec((0usize..7, 0usize..7, 0.5f64..5.0, 1.0f64..20.0), 3..16),
                flows in proptest::collection::vec(0.0f64..30.0, 16),
                fc in 0.0f64..20.0,
                pick in any::<prop::sample::Index>(),
            ) {
                let Some(net) = random_net(n, &arcs) else { return Ok(()); };
                let bv = BeliefVector::point_masses(&flows[..net.edge_count()]);
                let cs = enumerate_commodities(&net, 5);
                prop_assume!(!cs.is_empty());
                let c = pick.get(&cs);
                let q = PathQuery::start(c.origin, c.destination, fc, 5);
                let best = system_best_path(&q, &bv, &net, p()).unwrap();
                let worst = system_worst_path(&q, &bv, &net, p()).unwrap();
                prop_assert!(worst.score >= best.score);

                // brute force over the commodity's own path set
                let scores: Vec<f64> = c.candidate_paths.iter()
                    .map(|path| path_network_time(&net, &bv, path, fc, p()).unwrap())
                    .collect();
                let lo = scores.iter().cloned().fold(f64::MAX, f64::min);
                let hi = scores.iter().cloned().fold(f64::MIN, f64::max);
                prop_assert!((best.score - lo).abs() <= 1e-9 * lo.max(1.0));
                prop_assert!((worst.score - hi).abs() <= 1e-9 * hi.max(1.0));

                for &e in net.outgoing_edges(q.current).unwrap() {
                    if let Ok(proj) = projected_path(e, &q, &bv, &net, p()) {
                        prop_assert!(proj.score >= best.score);
                    }
                }

                let again = system_best_path(&q, &bv, &net, p()).unwrap();
                prop_assert_eq!(again, best);
            }

            #[test]
            fn selfish_choice_ignores_uniform_time_scaling(
                arcs in proptest::collection::vec((0usize..6, 0usize..6, 0.5f64..5.0, 1.0f64..20.0), 3..14),
                flows in proptest::collection::vec(0.0f64..30.0, 14),
                fc in 0.0f64..20.0,
                shift in -3i32..4,
                pick in any::<prop::sample::Index>(),
            ) {
                let Some(net) = random_net(6, &arcs) else { return Ok(()); };
                let scale = 2f64.powi(shift);
                let mut b = NetworkBuilder::new();
                for v in net.nodes() { b.node(net.label(v)); }
                for e in net.edges() {
                    b.edge(net.label(e.tail), net.label(e.head), e.free_flow_time * scale, e.capacity);
                }
                let scaled = b.build().unwrap();
                let bv = BeliefVector::point_masses(&flows[..net.edge_count()]);
                let cs = enumerate_commodities(&net, 5);
                prop_assume!(!cs.is_empty());
                let c = pick.get(&cs);
                let q = PathQuery::start(c.origin, c.destination, fc, 5);
                let a = selfish_best_path(&q, &bv, &net, p()).unwrap();
                let b = selfish_best_path(&q, &bv, &scaled, p()).unwrap();
                prop_assert_eq!(a.edges, b.edges);
            }
        }
    }
}
