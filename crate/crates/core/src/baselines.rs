//! Comparison controllers: DOC, TASR, RCS and SC.

use std::collections::VecDeque;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::episode::{run_episode, ControlPolicy, EpisodeResult, Scenario, StepObservation};
use crate::error::{Error, Result};

/// Disagreement-based switching parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DocConfig {
    pub window: usize,
    /// Switch once the window holds more than this many disagreements.
    pub gamma: usize,
    pub initial_modality: usize,
}

impl Default for DocConfig {
    fn default() -> Self {
        Self {
            window: 2,
            gamma: 1,
            initial_modality: 0,
        }
    }
}

impl DocConfig {
    pub fn validate(&self) -> Result<()> {
        if self.gamma == 0 || self.window < self.gamma {
            return Err(Error::Precondition(format!(
                "DOC needs 1 <= gamma <= window, got gamma {} window {}",
                self.gamma, self.window
            )));
        }
        Ok(())
    }
}

fn point_strategy(m: usize, active: usize) -> Vec<f64> {
    let mut s = vec![0.0; m];
    s[active] = 1.0;
    s
}

fn check_index(m: usize, idx: usize) -> Result<()> {
    if idx >= m {
        return Err(Error::Precondition(format!(
            "modality index {idx} out of range for {m} modalities"
        )));
    }
    Ok(())
}

/// Keeps one controller until it disagrees with the system too often.
pub struct DocPolicy<'r, R> {
    cfg: DocConfig,
    modalities: usize,
    current: usize,
    recent: VecDeque<bool>,
    rng: &'r mut R,
}

impl<'r, R: Rng> DocPolicy<'r, R> {
    pub fn new(modalities: usize, cfg: DocConfig, rng: &'r mut R) -> Result<Self> {
        cfg.validate()?;
        check_index(modalities, cfg.initial_modality)?;
        Ok(Self {
            cfg,
            modalities,
            current: cfg.initial_modality,
            recent: VecDeque::with_capacity(cfg.window),
            rng,
        })
    }

    pub fn current(&self) -> usize {
        self.current
    }
}

impl<R: Rng> ControlPolicy for DocPolicy<'_, R> {
    fn select(&mut self) -> usize {
        self.current
    }

    fn observe(&mut self, obs: &StepObservation) -> Result<()> {
        if self.recent.len() == self.cfg.window {
            self.recent.pop_front();
        }
        self.recent.push_back(obs.chosen_edge != obs.preferred_edge);
        let disagreements = self.recent.iter().filter(|d| **d).count();
        if disagreements > self.cfg.gamma && self.modalities > 1 {
            let pick = self.rng.gen_range(0..self.modalities - 1);
            self.current = if pick >= self.current { pick + 1 } else { pick };
            self.recent.clear();
        }
        Ok(())
    }

    fn strategy(&self) -> Vec<f64> {
        point_strategy(self.modalities, self.current)
    }
}

/// A single controller for the whole episode.
pub struct FixedPolicy {
    modalities: usize,
    active: usize,
}

impl FixedPolicy {
    pub fn new(modalities: usize, active: usize) -> Result<Self> {
        check_index(modalities, active)?;
        Ok(Self { modalities, active })
    }
}

impl ControlPolicy for FixedPolicy {
    fn select(&mut self) -> usize {
        self.active
    }

    fn observe(&mut self, _obs: &StepObservation) -> Result<()> {
        Ok(())
    }

    fn strategy(&self) -> Vec<f64> {
        point_strategy(self.modalities, self.active)
    }
}

/// Uniformly random controller at every step.
pub struct RandomPolicy<'r, R> {
    modalities: usize,
    rng: &'r mut R,
}

impl<'r, R: Rng> RandomPolicy<'r, R> {
    pub fn new(modalities: usize, rng: &'r mut R) -> Result<Self> {
        if modalities == 0 {
            return Err(Error::Precondition(
                "at least one modality is required".into(),
            ));
        }
        Ok(Self { modalities, rng })
    }
}

impl<R: Rng> ControlPolicy for RandomPolicy<'_, R> {
    fn select(&mut self) -> usize {
        self.rng.gen_range(0..self.modalities)
    }

    fn observe(&mut self, _obs: &StepObservation) -> Result<()> {
        Ok(())
    }

    fn strategy(&self) -> Vec<f64> {
        vec![1.0 / self.modalities as f64; self.modalities]
    }
}

/// Index of the highest prior trust; ties go to the lowest index.
pub fn tasr_choice(prior: &[f64]) -> Result<usize> {
    if prior.is_empty() {
        return Err(Error::Precondition("TASR needs a nonempty prior".into()));
    }
    let mut best = 0;
    for (i, p) in prior.iter().enumerate() {
        if *p > prior[best] {
            best = i;
        }
    }
    Ok(best)
}

pub fn run_doc_episode<R: Rng>(
    scenario: Scenario<'_>,
    cfg: DocConfig,
    max_steps: Option<usize>,
    rng: &mut R,
) -> Result<EpisodeResult> {
    let policy = DocPolicy::new(scenario.modalities.len(), cfg, rng)?;
    run_episode(scenario, policy, max_steps)
}

pub fn run_tasr_episode(
    scenario: Scenario<'_>,
    prior: &[f64],
    max_steps: Option<usize>,
) -> Result<EpisodeResult> {
    if prior.len() != scenario.modalities.len() {
        return Err(Error::Precondition(format!(
            "prior has {} entries for {} modalities",
            prior.len(),
            scenario.modalities.len()
        )));
    }
    let active = tasr_choice(prior)?;
    run_episode(scenario, FixedPolicy::new(prior.len(), active)?, max_steps)
}

pub fn run_rcs_episode<R: Rng>(
    scenario: Scenario<'_>,
    max_steps: Option<usize>,
    rng: &mut R,
) -> Result<EpisodeResult> {
    let policy = RandomPolicy::new(scenario.modalities.len(), rng)?;
    run_episode(scenario, policy, max_steps)
}

pub fn run_sc_episode(
    scenario: Scenario<'_>,
    modality: usize,
    max_steps: Option<usize>,
) -> Result<EpisodeResult> {
    let policy = FixedPolicy::new(scenario.modalities.len(), modality)?;
    run_episode(scenario, policy, max_steps)
}
