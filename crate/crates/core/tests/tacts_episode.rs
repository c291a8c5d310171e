mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tacts_core::baselines::run_sc_episode;
use tacts_core::beliefs::{BeliefVector, ModalityProfile};
use tacts_core::episode::EpisodeRunner;
use tacts_core::network::{enumerate_commodities, NetworkBuilder};
use tacts_core::oracle::compute_oracle;
use tacts_core::tacts::{InverseCdf, TactsPolicy};
use tacts_core::{run_tacts_episode, BprParams, FlowState, Scenario, TactsConfig};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn step_invariants(seed in 0u64..100_000) {
        let inst = common::random_instance(seed, 14, None);
        let s = inst.scenario();
        let m = inst.modalities.len();
        let policy = TactsPolicy::new(m, TactsConfig::default(), InverseCdf::new(ChaCha8Rng::seed_from_u64(seed))).unwrap();
        let mut runner = EpisodeRunner::new(s, policy, None).unwrap();
        while let Some(rec) = runner.step().unwrap() {
            let sum: f64 = rec.strategy_after.iter().sum();
            prop_assert!((sum - 1.0).abs() < 1e-9);
            prop_assert!(rec.strategy_after.iter().all(|p| *p >= 0.0));
            prop_assert!((0.0..=1.0).contains(&rec.normalized_regret));
            prop_assert!(rec.regret >= 0.0);
            let st = runner.policy().state();
            prop_assert_eq!(&st.trust, &st.strategy);
        }
    }

    #[test]
    fn episodes_are_deterministic(seed in 0u64..100_000) {
        let inst = common::random_instance(seed, 14, None);
        let cfg = TactsConfig { rng_seed: seed, ..TactsConfig::default() };
        let a = run_tacts_episode(inst.scenario(), &cfg).unwrap();
        let b = run_tacts_episode(inst.scenario(), &cfg).unwrap();
        prop_assert_eq!(a.trace_jsonl(), b.trace_jsonl());
        prop_assert_eq!(a, b);
    }
}

#[test]
fn single_modality_matches_sc() {
    for seed in 0..50 {
        let inst = common::random_instance(seed, 14, Some(1));
        let t = run_tacts_episode(
            inst.scenario(),
            &TactsConfig {
                rng_seed: seed,
                ..TactsConfig::default()
            },
        )
        .unwrap();
        let sc = run_sc_episode(inst.scenario(), 0, None).unwrap();
        assert_eq!(t.path, sc.path);
        assert!(t.steps.iter().all(|s| s.strategy_after == vec![1.0]));
    }
}

#[test]
fn aligned_modalities_on_diamond() {
    // uncongested diamond: the fewest-hop route is also the fastest, so the
    // vehicle and system objectives agree
    let mut b = NetworkBuilder::new();
    b.edge("s", "u", 1.0, 10.0)
        .edge("u", "t", 1.0, 10.0)
        .edge("s", "w", 1.5, 10.0)
        .edge("w", "x", 1.5, 10.0)
        .edge("x", "t", 1.5, 10.0);
    let net = b.build().unwrap();
    let flows = FlowState::new(&net, vec![2.0, 2.0, 1.0, 1.0, 1.0]).unwrap();
    let mods: Vec<_> = (1..=3)
        .map(|id| ModalityProfile::new(id, 1.0, BeliefVector::from_flows(&flows)).unwrap())
        .collect();
    let commodity = enumerate_commodities(&net, 5)
        .into_iter()
        .find(|c| net.label(c.origin) == "s" && net.label(c.destination) == "t")
        .unwrap();
    let s = Scenario {
        net: &net,
        commodity: &commodity,
        true_flows: &flows,
        modalities: &mods,
        vehicle_flow: 1.0,
        bpr: BprParams::default(),
        max_path_edges: 5,
    };
    let tau = compute_oracle(&s).unwrap().tau_star;
    let r = run_tacts_episode(s, &TactsConfig::default())
        .unwrap()
        .with_oracle(tau);
    assert!(r.steps.iter().all(|st| st.regret == 0.0));
    assert_eq!(r.performance_ratio, Some(1.0));
    // zero regret lifts the active modality's trust to 1, so σ leaves uniform
    let first = &r.steps[0];
    assert!((first.strategy_after[first.active_modality] - 0.6).abs() < 1e-12);
}
