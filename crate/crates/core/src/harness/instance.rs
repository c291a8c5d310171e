use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::beliefs::{generate_modality_belief, ModalityProfile};
use crate::costmodel::{BprParams, FlowState};
use crate::episode::Scenario;
use crate::error::{Error, Result};
use crate::harness::config::ExperimentConfig;
use crate::network::{enumerate_commodities, parse_tntp, Commodity, TrafficNetwork};
use crate::seeds::mix;

const INSTANCE_SALT: u64 = 0x1_5747_A9CE;

/// Seed for repetition `rep`; independent of which algorithms run.
pub fn repetition_seed(base_seed: u64, rep: usize) -> u64 {
    mix(mix(base_seed, rep as u64), INSTANCE_SALT)
}

/// One randomized routing problem shared by every algorithm in a repetition.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub repetition: usize,
    pub seed: u64,
    pub commodity: Commodity,
    pub true_flows: FlowState,
    pub modalities: Vec<ModalityProfile>,
}

/// A validated config together with its loaded network.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub config: ExperimentConfig,
    pub net: TrafficNetwork,
    pub commodities: Vec<Commodity>,
    pub bpr: BprParams,
}

impl Experiment {
    pub fn load(config: ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let path = &config.network_path;
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let net = parse_tntp(&text)?;
        Self::new(config, net)
    }

    pub fn new(config: ExperimentConfig, net: TrafficNetwork) -> Result<Self> {
        let commodities = enumerate_commodities(&net, config.max_path_edges);
        if commodities.is_empty() {
            return Err(Error::Config(
                "network has no origin-destination pair within the path cap".into(),
            ));
        }
        Ok(Self {
            config,
            net,
            commodities,
            bpr: BprParams::default(),
        })
    }

    pub fn build_instance(&self, rep: usize) -> Result<Instance> {
        let seed = repetition_seed(self.config.base_seed, rep);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let commodity = self.commodities[rng.gen_range(0..self.commodities.len())].clone();
        let true_flows =
            FlowState::scaled_capacity(&self.net, self.config.congestion_level.multiplier())?;
        let range = self.config.modality_count_range;
        let count = rng.gen_range(range.lo..=range.hi);
        let mut modalities = Vec::with_capacity(count);
        for id in 1..=count {
            let trust: f64 = rng.gen();
            let beliefs = generate_modality_belief(&true_flows, &self.net, trust, &mut rng)?;
            modalities.push(ModalityProfile::new(id, trust, beliefs)?);
        }
        Ok(Instance {
            repetition: rep,
            seed,
            commodity,
            true_flows,
            modalities,
        })
    }

    pub fn scenario<'a>(&'a self, inst: &'a Instance) -> Scenario<'a> {
        Scenario {
            net: &self.net,
            commodity: &inst.commodity,
            true_flows: &inst.true_flows,
            modalities: &inst.modalities,
            vehicle_flow: self.config.f_c,
            bpr: self.bpr,
            max_path_edges: self.config.max_path_edges,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::{Congestion, ModalityRange};
    use crate::network::NetworkBuilder;

    fn experiment(range: ModalityRange) -> Experiment {
        let mut b = NetworkBuilder::new();
        b.edge("a", "b", 1.0, 10.0)
            .edge("b", "c", 2.0, 10.0)
            .edge("a", "c", 4.0, 20.0);
        let cfg = ExperimentConfig {
            network_path: "unused".into(),
            congestion_level: Congestion::Low,
            modality_count_range: range,
            ..ExperimentConfig::default()
        };
        Experiment::new(cfg, b.build().unwrap()).unwrap()
    }

    #[test]
    fn low_congestion_flow() {
        let ex = experiment(ModalityRange::default());
        let inst = ex.build_instance(0).unwrap();
        assert_eq!(inst.true_flows.as_slice()[0], 2.5);
        assert_eq!(inst.true_flows.as_slice()[2], 5.0);
    }

    #[test]
    fn instances_are_reproducible() {
        let ex = experiment(ModalityRange::default());
        assert_eq!(ex.build_instance(3).unwrap(), ex.build_instance(3).unwrap());
        assert_ne!(
            ex.build_instance(3).unwrap().seed,
            ex.build_instance(4).unwrap().seed
        );
    }

    #[test]
    fn fixed_modality_count() {
        let ex = experiment(ModalityRange { lo: 2, hi: 2 });
        for rep in 0..20 {
            assert_eq!(ex.build_instance(rep).unwrap().modalities.len(), 2);
        }
    }

    #[test]
    fn no_commodities_is_config_error() {
        let mut b = NetworkBuilder::new();
        b.edge("a", "b", 1.0, 1.0);
        let net = b.build().unwrap();
        let cfg = ExperimentConfig {
            max_path_edges: 1,
            ..ExperimentConfig::default()
        };
        // a single edge still gives one commodity
        assert!(Experiment::new(cfg.clone(), net).is_ok());
        let mut b = NetworkBuilder::new();
        b.node("a");
        b.node("b");
        assert!(matches!(
            Experiment::new(cfg, b.build().unwrap()),
            Err(Error::Config(_))
        ));
    }
}
