#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tacts_core::beliefs::{generate_modality_belief, BeliefVector, ModalityProfile};
use tacts_core::network::{enumerate_commodities, NetworkBuilder, DEFAULT_MAX_PATH_EDGES};
use tacts_core::{BprParams, Commodity, FlowState, Scenario, TrafficNetwork};

pub struct Owned {
    pub net: TrafficNetwork,
    pub commodity: Commodity,
    pub flows: FlowState,
    pub modalities: Vec<ModalityProfile>,
    pub vehicle_flow: f64,
}

impl Owned {
    pub fn scenario(&self) -> Scenario<'_> {
        Scenario {
            net: &self.net,
            commodity: &self.commodity,
            true_flows: &self.flows,
            modalities: &self.modalities,
            vehicle_flow: self.vehicle_flow,
            bpr: BprParams::default(),
            max_path_edges: DEFAULT_MAX_PATH_EDGES,
        }
    }
}

/// Random strongly-branching network with up to `max_nodes` nodes.
pub fn random_network(rng: &mut ChaCha8Rng, max_nodes: usize) -> TrafficNetwork {
    let n = rng.gen_range(4..=max_nodes);
    let mut b = NetworkBuilder::new();
    for i in 0..n {
        b.node(&format!("v{i}"));
    }
    let mut seen = std::collections::HashSet::new();
    // a backbone so every node is reachable from v0
    for i in 1..n {
        let from = rng.gen_range(0..i);
        seen.insert((from, i));
    }
    let extra = rng.gen_range(n..=3 * n);
    for _ in 0..extra {
        let (a, c) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if a != c {
            seen.insert((a, c));
        }
    }
    let mut pairs: Vec<_> = seen.into_iter().collect();
    pairs.sort();
    for (a, c) in pairs {
        let fft = rng.gen_range(0.5..10.0);
        let cap = rng.gen_range(5.0..30.0);
        b.edge(&format!("v{a}"), &format!("v{c}"), fft, cap);
    }
    b.build().unwrap()
}

/// Instance with random beliefs; `modalities` fixes M when given.
pub fn random_instance(seed: u64, max_nodes: usize, modalities: Option<usize>) -> Owned {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let net = random_network(&mut rng, max_nodes);
    let commodities = enumerate_commodities(&net, DEFAULT_MAX_PATH_EDGES);
    let commodity = commodities[rng.gen_range(0..commodities.len())].clone();
    let scale = [0.25, 0.75, 1.5][rng.gen_range(0..3)];
    let flows = FlowState::scaled_capacity(&net, scale).unwrap();
    let m = modalities.unwrap_or_else(|| rng.gen_range(2..=6));
    let modalities = (1..=m)
        .map(|id| {
            let t: f64 = rng.gen();
            let beliefs = generate_modality_belief(&flows, &net, t, &mut rng).unwrap();
            ModalityProfile::new(id, t, beliefs).unwrap()
        })
        .collect();
    let vehicle_flow = [1.0, 10.0, 30.0][rng.gen_range(0..3)];
    Owned {
        net,
        commodity,
        flows,
        modalities,
        vehicle_flow,
    }
}

/// Same instance, but every modality believes the true flows.
pub fn aligned(mut inst: Owned) -> Owned {
    for m in &mut inst.modalities {
        m.beliefs = BeliefVector::from_flows(&inst.flows);
    }
    inst
}
