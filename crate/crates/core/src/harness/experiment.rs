use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{run_doc_episode, run_rcs_episode, run_sc_episode, run_tasr_episode};
use crate::episode::EpisodeResult;
use crate::error::Result;
use crate::harness::config::{Algorithm, Congestion};
use crate::harness::instance::{Experiment, Instance};
use crate::oracle::compute_oracle;
use crate::seeds::mix;
use crate::tacts::{run_tacts_episode, TactsConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub algorithm: Algorithm,
    pub repetition: usize,
    pub congestion: Congestion,
    pub f_c: f64,
    pub origin: String,
    pub destination: String,
    pub modality_count: usize,
    pub performance_ratio: Option<f64>,
    pub realized_total_time: Option<f64>,
    pub oracle_time: Option<f64>,
    pub regret_sum: Option<f64>,
    pub steps: usize,
    pub wall_clock_micros: f64,
    pub failed: bool,
    pub failure: String,
    pub seed: u64,
}

impl ResultRecord {
    fn blank(exp: &Experiment, algorithm: Algorithm, rep: usize, seed: u64) -> Self {
        Self {
            algorithm,
            repetition: rep,
            congestion: exp.config.congestion_level,
            f_c: exp.config.f_c,
            origin: String::new(),
            destination: String::new(),
            modality_count: 0,
            performance_ratio: None,
            realized_total_time: None,
            oracle_time: None,
            regret_sum: None,
            steps: 0,
            wall_clock_micros: 0.0,
            failed: true,
            failure: String::new(),
            seed,
        }
    }
}

fn algorithm_seed(inst: &Instance, algo: Algorithm) -> u64 {
    mix(inst.seed, algo.salt())
}

fn run_algorithm(exp: &Experiment, inst: &Instance, algo: Algorithm) -> Result<EpisodeResult> {
    let scenario = exp.scenario(inst);
    let cfg = &exp.config;
    let seed = algorithm_seed(inst, algo);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = inst.modalities.len();
    match algo {
        Algorithm::Tacts => run_tacts_episode(
            scenario,
            &TactsConfig {
                history_window: cfg.history_window,
                memory_decay: cfg.epsilon,
                max_steps: None,
                rng_seed: seed,
            },
        ),
        Algorithm::Doc => run_doc_episode(scenario, cfg.doc_config(), None, &mut rng),
        Algorithm::Tasr => run_tasr_episode(scenario, &vec![1.0 / m as f64; m], None),
        Algorithm::Rcs => run_rcs_episode(scenario, None, &mut rng),
        Algorithm::Sc => {
            let modality = rng.gen_range(0..m);
            run_sc_episode(scenario, modality, None)
        }
        Algorithm::Oracle => unreachable!("oracle is handled separately"),
    }
}

/// All records for one repetition, in algorithm order.
pub fn run_repetition(exp: &Experiment, rep: usize) -> Vec<ResultRecord> {
    let mut algos = exp.config.algorithms.clone();
    algos.sort();
    algos.dedup();

    let inst = match exp.build_instance(rep) {
        Ok(i) => i,
        Err(e) => {
            return algos
                .into_iter()
                .map(|a| ResultRecord {
                    failure: e.to_string(),
                    ..ResultRecord::blank(exp, a, rep, 0)
                })
                .collect();
        }
    };
    let template = ResultRecord {
        origin: exp.net.label(inst.commodity.origin).to_string(),
        destination: exp.net.label(inst.commodity.destination).to_string(),
        modality_count: inst.modalities.len(),
        ..ResultRecord::blank(exp, Algorithm::Oracle, rep, inst.seed)
    };

    let mut oracle_record = None;
    let mut tau_star = None;
    if exp.config.wants(Algorithm::Oracle) {
        let start = Instant::now();
        let outcome = compute_oracle(&exp.scenario(&inst));
        let wall = start.elapsed().as_secs_f64() * 1e6;
        oracle_record = Some(match outcome {
            Ok(o) => {
                tau_star = Some(o.tau_star);
                ResultRecord {
                    performance_ratio: Some(1.0),
                    realized_total_time: Some(o.tau_star),
                    oracle_time: Some(o.tau_star),
                    steps: o.path.len(),
                    wall_clock_micros: wall,
                    failed: false,
                    ..template.clone()
                }
            }
            Err(e) => ResultRecord {
                wall_clock_micros: wall,
                failure: e.to_string(),
                ..template.clone()
            },
        });
    }

    let mut out = Vec::with_capacity(algos.len());
    for algo in algos {
        if algo == Algorithm::Oracle {
            out.extend(oracle_record.take());
            continue;
        }
        let start = Instant::now();
        let outcome = run_algorithm(exp, &inst, algo);
        let wall = start.elapsed().as_secs_f64() * 1e6;
        let rec = match outcome {
            Ok(mut r) => {
                if let Some(t) = tau_star {
                    r = r.with_oracle(t);
                }
                ResultRecord {
                    algorithm: algo,
                    performance_ratio: r.performance_ratio,
                    realized_total_time: Some(r.realized_total_time),
                    oracle_time: r.oracle_total_time,
                    regret_sum: Some(r.regret_sum),
                    steps: r.steps.len(),
                    wall_clock_micros: wall,
                    failed: r.failed,
                    failure: r.failure.unwrap_or_default(),
                    ..template.clone()
                }
            }
            Err(e) => ResultRecord {
                algorithm: algo,
                oracle_time: tau_star,
                wall_clock_micros: wall,
                failure: e.to_string(),
                ..template.clone()
            },
        };
        out.push(rec);
    }
    out
}

/// Runs every repetition in parallel; output order is (repetition, algorithm).
pub fn run_experiment(exp: &Experiment) -> Vec<ResultRecord> {
    (0..exp.config.repetitions)
        .into_par_iter()
        .map(|rep| run_repetition(exp, rep))
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect()
}
