//! Edge-flow beliefs held by the arbitration system and by each modality.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::costmodel::FlowState;
use crate::error::{Error, Result};
use crate::network::{EdgeId, TrafficNetwork};

/// Absolute tolerance on the total probability mass of a belief.
pub const PROB_TOLERANCE: f64 = 1e-9;

/// Finite discrete distribution over the existing flow on one edge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowBelief {
    support: Vec<f64>,
    probs: Vec<f64>,
}

impl FlowBelief {
    pub fn new(support: Vec<f64>, probs: Vec<f64>) -> Result<Self> {
        let b = Self { support, probs };
        b.validate().map_err(Error::Validation)?;
        Ok(b)
    }

    pub fn point(flow: f64) -> Self {
        Self {
            support: vec![flow],
            probs: vec![1.0],
        }
    }

    #[cfg(test)]
    pub(crate) fn unchecked(support: Vec<f64>, probs: Vec<f64>) -> Self {
        Self { support, probs }
    }

    pub fn support(&self) -> &[f64] {
        &self.support
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.support.iter().copied().zip(self.probs.iter().copied())
    }

    /// Probability-weighted mean flow.
    pub fn mean(&self) -> f64 {
        self.iter().map(|(f, p)| f * p).sum()
    }

    pub fn validate(&self) -> std::result::Result<(), String> {
        if self.support.len() != self.probs.len() {
            return Err(format!(
                "support has {} values but probs has {}",
                self.support.len(),
                self.probs.len()
            ));
        }
        if self.support.is_empty() {
            return Err("empty support".into());
        }
        if let Some(f) = self
            .support
            .iter()
            .find(|f| !(**f >= 0.0) || !f.is_finite())
        {
            return Err(format!("support value {f} is not a nonnegative flow"));
        }
        if let Some(p) = self.probs.iter().find(|p| !(**p >= 0.0)) {
            return Err(format!("negative probability {p}"));
        }
        let total: f64 = self.probs.iter().sum();
        if (total - 1.0).abs() > PROB_TOLERANCE {
            return Err(format!("probabilities sum to {total}"));
        }
        let mut sorted = self.support.clone();
        sorted.sort_by(f64::total_cmp);
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err("support values are not distinct".into());
        }
        Ok(())
    }
}

/// One belief per network edge.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BeliefVector {
    per_edge: BTreeMap<EdgeId, FlowBelief>,
}

impl BeliefVector {
    pub fn new() -> Self {
        Self::default()
    }

    /// Point masses at `flows[i]` for edge `i`.
    pub fn point_masses(flows: &[f64]) -> Self {
        Self {
            per_edge: flows
                .iter()
                .enumerate()
                .map(|(i, &f)| (EdgeId(i), FlowBelief::point(f)))
                .collect(),
        }
    }

    pub fn from_flows(flows: &FlowState) -> Self {
        Self::point_masses(flows.as_slice())
    }

    pub fn insert(&mut self, edge: EdgeId, belief: FlowBelief) -> Option<FlowBelief> {
        self.per_edge.insert(edge, belief)
    }

    pub fn get(&self, edge: EdgeId) -> Result<&FlowBelief> {
        self.per_edge
            .get(&edge)
            .ok_or_else(|| Error::Validation(format!("no belief for edge {}", edge.index())))
    }

    pub fn iter(&self) -> impl Iterator<Item = (EdgeId, &FlowBelief)> {
        self.per_edge.iter().map(|(e, b)| (*e, b))
    }

    pub fn len(&self) -> usize {
        self.per_edge.len()
    }

    pub fn is_empty(&self) -> bool {
        self.per_edge.is_empty()
    }

    /// Coverage of every edge of `net` plus validity of each distribution.
    pub fn validate(&self, net: &TrafficNetwork) -> Result<()> {
        for e in net.edges() {
            let b = self.per_edge.get(&e.id).ok_or_else(|| {
                Error::Validation(format!(
                    "belief vector is missing edge {} {}",
                    e.id.index(),
                    net.edge_label(e.id)
                ))
            })?;
            b.validate().map_err(|msg| {
                Error::Validation(format!(
                    "edge {} {}: {msg}",
                    e.id.index(),
                    net.edge_label(e.id)
                ))
            })?;
        }
        if let Some((extra, _)) = self.per_edge.range(EdgeId(net.edge_count())..).next() {
            return Err(Error::Validation(format!(
                "belief for edge {} which is not in the network",
                extra.index()
            )));
        }
        Ok(())
    }

    pub fn to_fixture_json(&self) -> String {
        let fixture = BeliefFixture {
            edges: self
                .per_edge
                .iter()
                .map(|(e, b)| BeliefEntry {
                    edge: e.index(),
                    support: b.support.clone(),
                    probs: b.probs.clone(),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&fixture).expect("belief fixture serializes")
    }

    /// Reads a fixture; each entry is validated, coverage is left to [`BeliefVector::validate`].
    pub fn from_fixture_json(text: &str) -> Result<Self> {
        let fixture: BeliefFixture = serde_json::from_str(text)
            .map_err(|e| Error::parse(e.line(), format!("belief fixture: {e}")))?;
        let mut out = Self::new();
        for entry in fixture.edges {
            let belief = FlowBelief::new(entry.support, entry.probs)
                .map_err(|e| Error::Validation(format!("edge {}: {e}", entry.edge)))?;
            if out.insert(EdgeId(entry.edge), belief).is_some() {
                return Err(Error::Validation(format!(
                    "edge {} listed twice",
                    entry.edge
                )));
            }
        }
        Ok(out)
    }
}

#[derive(Serialize, Deserialize)]
struct BeliefFixture {
    edges: Vec<BeliefEntry>,
}

#[derive(Serialize, Deserialize)]
struct BeliefEntry {
    edge: usize,
    support: Vec<f64>,
    probs: Vec<f64>,
}

/// An operational modality: its true trustworthiness and private beliefs.
#[derive(Debug, Clone, PartialEq)]
pub struct ModalityProfile {
    pub id: usize,
    pub true_trust: f64,
    pub beliefs: BeliefVector,
}

impl ModalityProfile {
    pub fn new(id: usize, true_trust: f64, beliefs: BeliefVector) -> Result<Self> {
        if !(0.0..=1.0).contains(&true_trust) {
            return Err(Error::Validation(format!(
                "modality {id}: true trust {true_trust} outside [0, 1]"
            )));
        }
        Ok(Self {
            id,
            true_trust,
            beliefs,
        })
    }
}

/// The system observes the network through roadside units, so its beliefs
/// are replaced by point masses at the observed flows.
pub fn system_belief_update(_current: &BeliefVector, true_flows: &FlowState) -> BeliefVector {
    BeliefVector::from_flows(true_flows)
}

/// Half-width of the perturbation window for an edge of capacity `capacity`.
pub fn perturbation_half_width(capacity: f64, true_trust: f64) -> f64 {
    1.5 * capacity * (1.0 - true_trust).max(0.0).sqrt()
}

/// Draws a modality's point-mass beliefs: exact with probability
/// `true_trust`, otherwise uniform on `[max(0, f - d), f + d]`.
pub fn generate_modality_belief<R: Rng + ?Sized>(
    true_flows: &FlowState,
    net: &TrafficNetwork,
    true_trust: f64,
    rng: &mut R,
) -> Result<BeliefVector> {
    if !(0.0..=1.0).contains(&true_trust) {
        return Err(Error::Validation(format!(
            "true trust {true_trust} outside [0, 1]"
        )));
    }
    if true_flows.len() != net.edge_count() {
        return Err(Error::Validation(format!(
            "flow state has {} entries for {} edges",
            true_flows.len(),
            net.edge_count()
        )));
    }
    let mut out = BeliefVector::new();
    for e in net.edges() {
        let truth = true_flows.flow(e.id);
        let exact: f64 = rng.gen();
        let believed = if exact < true_trust {
            truth
        } else {
            let d = perturbation_half_width(e.capacity, true_trust);
            rng.gen_range((truth - d).max(0.0)..=truth + d)
        };
        out.insert(e.id, FlowBelief::point(believed));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::NetworkBuilder;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn single(c: f64) -> TrafficNetwork {
        let mut b = NetworkBuilder::new();
        b.edge("u", "v", 1.0, c);
        b.build().unwrap()
    }

    #[test]
    fn rsu_update_is_point_mass_and_idempotent() {
        let mut b = NetworkBuilder::new();
        b.edge("a", "b", 1.0, 10.0).edge("b", "c", 1.0, 10.0);
        let net = b.build().unwrap();
        let flows = FlowState::new(&net, vec![7.5, 3.0]).unwrap();
        let once = system_belief_update(&BeliefVector::new(), &flows);
        assert_eq!(once.get(EdgeId(0)).unwrap(), &FlowBelief::point(7.5));
        let twice = system_belief_update(&once, &flows);
        assert_eq!(once, twice);

        let changed = FlowState::new(&net, vec![7.5, 4.0]).unwrap();
        let other = system_belief_update(&once, &changed);
        assert_eq!(other.get(EdgeId(0)).unwrap(), once.get(EdgeId(0)).unwrap());
        assert_ne!(other.get(EdgeId(1)).unwrap(), once.get(EdgeId(1)).unwrap());
    }

    #[test]
    fn validation_cases() {
        let mut b = NetworkBuilder::new();
        b.edge("a", "b", 1.0, 10.0).edge("b", "c", 1.0, 10.0);
        let net = b.build().unwrap();
        assert!(BeliefVector::point_masses(&[1.0, 2.0])
            .validate(&net)
            .is_ok());

        let mut missing = BeliefVector::new();
        missing.insert(EdgeId(0), FlowBelief::point(1.0));
        match missing.validate(&net) {
            Err(Error::Validation(msg)) => assert!(msg.contains("edge 1"), "{msg}"),
            other => panic!("unexpected {other:?}"),
        }

        let mut short = BeliefVector::point_masses(&[1.0, 2.0]);
        short.insert(
            EdgeId(1),
            FlowBelief::unchecked(vec![0.0, 5.0], vec![0.5, 0.4]),
        );
        assert!(matches!(short.validate(&net), Err(Error::Validation(_))));

        assert!(FlowBelief::new(vec![1.0, 1.0], vec![0.5, 0.5]).is_err());
        assert!(FlowBelief::new(vec![-1.0], vec![1.0]).is_err());
        assert!(FlowBelief::new(vec![1.0], vec![1.0, 0.0]).is_err());
    }

    #[test]
    fn full_trust_reproduces_truth() {
        let mut b = NetworkBuilder::new();
        for i in 0..20 {
            b.edge(
                &format!("n{i}"),
                &format!("n{}", i + 1),
                1.0,
                5.0 + i as f64,
            );
        }
        let net = b.build().unwrap();
        let flows = FlowState::scaled_capacity(&net, 0.75).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let bv = generate_modality_belief(&flows, &net, 1.0, &mut rng).unwrap();
        assert_eq!(bv, BeliefVector::from_flows(&flows));
    }

    #[test]
    fn generation_is_seeded() {
        let net = single(10.0);
        let flows = FlowState::new(&net, vec![5.0]).unwrap();
        let a = generate_modality_belief(&flows, &net, 0.4, &mut ChaCha8Rng::seed_from_u64(11))
            .unwrap();
        let b = generate_modality_belief(&flows, &net, 0.4, &mut ChaCha8Rng::seed_from_u64(11))
            .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn zero_trust_is_uniform_on_clipped_window() {
        // d = 1.5 * 10 * 1 = 15, window [max(0, 5 - 15), 5 + 15] = [0, 20]
        let net = single(10.0);
        let flows = FlowState::new(&net, vec![5.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let n = 100_000;
        let mut draws: Vec<f64> = (0..n)
            .map(|_| {
                generate_modality_belief(&flows, &net, 0.0, &mut rng)
                    .unwrap()
                    .get(EdgeId(0))
                    .unwrap()
                    .mean()
            })
            .collect();
        assert!(draws.iter().all(|&x| (0.0..=20.0).contains(&x)));
        draws.sort_by(f64::total_cmp);
        // Kolmogorov-Smirnov distance against U[0, 20]
        let ks = draws
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let cdf = x / 20.0;
                let lo = i as f64 / n as f64;
                let hi = (i + 1) as f64 / n as f64;
                (cdf - lo).abs().max((hi - cdf).abs())
            })
            .fold(0.0, f64::max);
        assert!(ks < 1.63 / (n as f64).sqrt(), "KS distance {ks}");
    }

    #[test]
    fn exact_frequency_matches_trust() {
        let net = single(10.0);
        let flows = FlowState::new(&net, vec![5.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for t in [0.1, 0.5, 0.83] {
            let n = 100_000;
            let hits = (0..n)
                .filter(|_| {
                    let bv = generate_modality_belief(&flows, &net, t, &mut rng).unwrap();
                    bv.get(EdgeId(0)).unwrap().mean() == 5.0
                })
                .count() as f64;
            let sigma = (n as f64 * t * (1.0 - t)).sqrt();
            assert!(
                (hits - n as f64 * t).abs() <= 3.0 * sigma,
                "t={t} hits={hits}"
            );
        }
    }

    #[test]
    fn half_width_decreases_with_trust() {
        let ws: Vec<f64> = (0..=10)
            .map(|i| perturbation_half_width(10.0, i as f64 / 10.0))
            .collect();
        assert!(ws.windows(2).all(|w| w[0] > w[1]));
        assert_eq!(ws[10], 0.0);
    }

    #[test]
    fn fixture_round_trip() {
        let mut bv = BeliefVector::point_masses(&[0.0, 10.0]);
        bv.insert(
            EdgeId(2),
            FlowBelief::new(vec![0.0, 10.0], vec![0.62, 0.38]).unwrap(),
        );
        let text = bv.to_fixture_json();
        assert_eq!(BeliefVector::from_fixture_json(&text).unwrap(), bv);
        assert!(BeliefVector::from_fixture_json(
            "{\"edges\": [{\"edge\": 0, \"support\": [1], \"probs\": [0.9]}]}"
        )
        .is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn generated_beliefs_are_valid(seed in any::<u64>(), t in 0.0f64..=1.0, mult in 0.0f64..2.0) {
                let mut b = NetworkBuilder::new();
                b.edge("a", "b", 1.0, 3.0).edge("b", "c", 2.0, 50.0).edge("a", "c", 1.0, 0.5);
                let net = b.build().unwrap();
                let flows = FlowState::scaled_capacity(&net, mult).unwrap();
                let bv = generate_modality_belief(&flows, &net, t, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
                prop_assert!(bv.validate(&net).is_ok());
            }
        }
    }
}
