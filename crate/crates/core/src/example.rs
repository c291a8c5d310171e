//! Six-edge, two-modality worked example with a hand-checkable trace.
//!
//! Nodes `a..f`; routes `a-b-c-d` and `a-e-f-d` to destination `d`. Modality 1
//! holds the true flows, modality 2 overestimates `(e,f)`. The first step is
//! forced onto modality 2 so its regret is visible.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::beliefs::{BeliefVector, FlowBelief, ModalityProfile};
use crate::costmodel::{BprParams, FlowState};
use crate::episode::{run_episode, Scenario};
use crate::error::{Error, Result};
use crate::network::{Commodity, NetworkBuilder, TrafficNetwork, DEFAULT_MAX_PATH_EDGES};
use crate::tacts::{InverseCdf, ScriptedSampler, TactsConfig, TactsPolicy};
use crate::EpisodeResult;

#[derive(Debug, Clone)]
pub struct WorkedExample {
    pub net: TrafficNetwork,
    pub commodity: Commodity,
    pub true_flows: FlowState,
    pub modalities: Vec<ModalityProfile>,
    pub bpr: BprParams,
    pub vehicle_flow: f64,
    pub config: TactsConfig,
}

impl WorkedExample {
    pub fn scenario(&self) -> Scenario<'_> {
        Scenario {
            net: &self.net,
            commodity: &self.commodity,
            true_flows: &self.true_flows,
            modalities: &self.modalities,
            vehicle_flow: self.vehicle_flow,
            bpr: self.bpr,
            max_path_edges: DEFAULT_MAX_PATH_EDGES,
        }
    }

    /// Runs TACTS with modality 2 in control for the first step.
    pub fn run(&self) -> Result<EpisodeResult> {
        let fallback = InverseCdf::new(ChaCha8Rng::seed_from_u64(self.config.rng_seed));
        let sampler = ScriptedSampler::new([1], fallback);
        let policy = TactsPolicy::new(self.modalities.len(), self.config, sampler)?;
        run_episode(self.scenario(), policy, self.config.max_steps)
    }
}

pub fn worked_example() -> Result<WorkedExample> {
    let mut b = NetworkBuilder::new();
    for (tail, head, fft) in [
        ("a", "b", 1.0),
        ("b", "c", 12.0),
        ("c", "d", 0.5),
        ("a", "e", 0.5),
        ("e", "f", 5.0),
        ("f", "d", 5.0),
    ] {
        b.edge(tail, head, fft, 10.0);
    }
    let net = b.build()?;
    let flows = vec![0.0, 0.0, 10.0, 0.0, 0.0, 0.0];
    let true_flows = FlowState::new(&net, flows.clone())?;

    let mut skewed = BeliefVector::point_masses(&flows);
    skewed.insert(
        net.edge_by_endpoints("e", "f")?,
        FlowBelief::new(vec![0.0, 10.0], vec![0.62, 0.38])?,
    );
    let modalities = vec![
        ModalityProfile::new(1, 1.0, BeliefVector::point_masses(&flows))?,
        ModalityProfile::new(2, 0.0, skewed)?,
    ];

    let origin = net.node_by_label("a")?;
    let destination = net.node_by_label("d")?;
    let commodity = crate::network::enumerate_commodities(&net, DEFAULT_MAX_PATH_EDGES)
        .into_iter()
        .find(|c| c.origin == origin && c.destination == destination)
        .ok_or_else(|| Error::Internal("example commodity missing".into()))?;

    Ok(WorkedExample {
        net,
        commodity,
        true_flows,
        modalities,
        bpr: BprParams::new(0.5, 4.0)?,
        vehicle_flow: 10.0,
        config: TactsConfig {
            history_window: 1,
            memory_decay: 0.1,
            max_steps: None,
            rng_seed: 0,
        },
    })
}

/// Human-readable step trace.
pub fn format_trace(ex: &WorkedExample, result: &EpisodeResult) -> String {
    let mut out = String::new();
    for s in &result.steps {
        let strategy: Vec<String> = s.strategy_after.iter().map(|p| format!("{p:.4}")).collect();
        out.push_str(&format!(
            "step {}  m{}  edge {}  system {}  regret {:.6}  normalized {:.6}  sigma [{}]  step time {:.6}\n",
            s.step,
            ex.modalities[s.active_modality].id,
            ex.net.edge_label(s.chosen_edge),
            ex.net.edge_label(s.system_preferred_edge),
            s.regret,
            s.normalized_regret,
            strategy.join(", "),
            s.realized_step_time,
        ));
    }
    out.push_str(&format!("realized {:.6}", result.realized_total_time));
    if let (Some(t), Some(r)) = (result.oracle_total_time, result.performance_ratio) {
        out.push_str(&format!("  oracle {t:.6}  ratio {r:.6}"));
    }
    out.push('\n');
    out
}
