//! Trust-aware arbitration: regret, trust and mixed-strategy updates.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::episode::{run_episode, ControlPolicy, EpisodeResult, Scenario, StepObservation};
use crate::error::{Error, Result};
use crate::routing::ScoredPath;

/// Regrets below this are treated as rounding noise rather than a bug.
pub const REGRET_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TactsConfig {
    /// Regret history window `N`.
    pub history_window: usize,
    /// Memory decay `ε` in (0, 1).
    pub memory_decay: f64,
    /// Defaults to `2|V|` when unset.
    pub max_steps: Option<usize>,
    pub rng_seed: u64,
}

impl Default for TactsConfig {
    fn default() -> Self {
        Self {
            history_window: 2,
            memory_decay: 0.01,
            max_steps: None,
            rng_seed: 0,
        }
    }
}

impl TactsConfig {
    pub fn validate(&self) -> Result<()> {
        if self.history_window == 0 {
            return Err(Error::Precondition(
                "history window must be at least 1".into(),
            ));
        }
        if !(self.memory_decay > 0.0 && self.memory_decay < 1.0) {
            return Err(Error::Precondition(format!(
                "memory decay {} is outside (0, 1)",
                self.memory_decay
            )));
        }
        Ok(())
    }
}

/// Regret of committing to the projected path instead of the system optimum.
pub fn instantaneous_regret(projected: &ScoredPath, best: &ScoredPath) -> Result<f64> {
    let r = projected.score - best.score;
    if r < -REGRET_TOLERANCE {
        return Err(Error::Internal(format!(
            "negative regret {r}: projected {} below optimum {}",
            projected.score, best.score
        )));
    }
    Ok(r.max(0.0))
}

/// Scales regret by the spread between the worst and best continuation.
pub fn normalize_regret(regret: f64, worst: &ScoredPath, best: &ScoredPath) -> f64 {
    let span = worst.score - best.score;
    if span <= REGRET_TOLERANCE {
        return 0.0;
    }
    (regret / span).clamp(0.0, 1.0)
}

/// Trust from the most recent normalized regrets, newest first.
///
/// Only `min(N, len - 1) + 1` entries are used; older ones are ignored.
pub fn update_trust(history: &[f64], history_window: usize, memory_decay: f64) -> Result<f64> {
    if history.is_empty() {
        return Err(Error::Precondition(
            "trust update needs at least one regret".into(),
        ));
    }
    if !(memory_decay > 0.0 && memory_decay < 1.0) {
        return Err(Error::Precondition(format!(
            "memory decay {memory_decay} is outside (0, 1)"
        )));
    }
    let terms = history_window.min(history.len() - 1) + 1;
    let mut num = 0.0;
    let mut den = 0.0;
    let mut w = 1.0;
    for r in history.iter().rev().take(terms) {
        num += w * r;
        den += w;
        w *= memory_decay;
    }
    Ok(1.0 - num / den)
}

/// Normalizes trust into a probability vector; uniform when all trust is gone.
pub fn update_strategy(trust: &[f64]) -> Vec<f64> {
    let total: f64 = trust.iter().sum();
    if total < 1e-12 {
        let m = trust.len() as f64;
        return vec![1.0 / m; trust.len()];
    }
    trust.iter().map(|a| a / total).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArbitrationState {
    pub trust: Vec<f64>,
    pub regret_history: Vec<Vec<f64>>,
    pub strategy: Vec<f64>,
    pub step: usize,
}

impl ArbitrationState {
    pub fn new(modalities: usize) -> Self {
        let strategy = vec![1.0 / modalities as f64; modalities];
        Self {
            trust: strategy.clone(),
            regret_history: vec![Vec::new(); modalities],
            strategy,
            step: 0,
        }
    }

    /// Records the active modality's normalized regret and refreshes σ.
    pub fn close_step(
        &mut self,
        active: usize,
        normalized_regret: f64,
        cfg: &TactsConfig,
    ) -> Result<()> {
        let history = self
            .regret_history
            .get_mut(active)
            .ok_or_else(|| Error::Internal(format!("modality index {active} out of range")))?;
        history.push(normalized_regret);
        self.trust[active] = update_trust(history, cfg.history_window, cfg.memory_decay)?;
        self.strategy = update_strategy(&self.trust);
        self.trust.clone_from(&self.strategy);
        self.step += 1;
        Ok(())
    }
}

/// Draws a controller from the current mixed strategy.
pub trait ModalitySampler {
    fn sample(&mut self, strategy: &[f64]) -> usize;
}

/// Inverse-CDF sampling with one uniform draw per step.
pub struct InverseCdf<R> {
    rng: R,
}

impl<R: Rng> InverseCdf<R> {
    pub fn new(rng: R) -> Self {
        Self { rng }
    }
}

impl<R: Rng> ModalitySampler for InverseCdf<R> {
    fn sample(&mut self, strategy: &[f64]) -> usize {
        let u: f64 = self.rng.gen();
        let mut acc = 0.0;
        let mut last_positive = 0;
        for (i, p) in strategy.iter().enumerate() {
            if *p > 0.0 {
                last_positive = i;
            }
            acc += p;
            if u < acc {
                return i;
            }
        }
        last_positive
    }
}

/// Replays fixed choices, then falls back to another sampler.
pub struct ScriptedSampler<S> {
    script: std::collections::VecDeque<usize>,
    fallback: S,
}

impl<S: ModalitySampler> ScriptedSampler<S> {
    pub fn new(script: impl IntoIterator<Item = usize>, fallback: S) -> Self {
        Self {
            script: script.into_iter().collect(),
            fallback,
        }
    }
}

impl<S: ModalitySampler> ModalitySampler for ScriptedSampler<S> {
    fn sample(&mut self, strategy: &[f64]) -> usize {
        self.script
            .pop_front()
            .unwrap_or_else(|| self.fallback.sample(strategy))
    }
}

pub struct TactsPolicy<S> {
    cfg: TactsConfig,
    state: ArbitrationState,
    sampler: S,
}

impl<S: ModalitySampler> TactsPolicy<S> {
    pub fn new(modalities: usize, cfg: TactsConfig, sampler: S) -> Result<Self> {
        cfg.validate()?;
        if modalities == 0 {
            return Err(Error::Precondition(
                "at least one modality is required".into(),
            ));
        }
        Ok(Self {
            cfg,
            state: ArbitrationState::new(modalities),
            sampler,
        })
    }

    pub fn state(&self) -> &ArbitrationState {
        &self.state
    }
}

impl<S: ModalitySampler> ControlPolicy for TactsPolicy<S> {
    fn select(&mut self) -> usize {
        self.sampler.sample(&self.state.strategy)
    }

    fn observe(&mut self, obs: &StepObservation) -> Result<()> {
        self.state
            .close_step(obs.modality, obs.normalized_regret, &self.cfg)
    }

    fn strategy(&self) -> Vec<f64> {
        self.state.strategy.clone()
    }
}

pub fn run_tacts_episode(scenario: Scenario<'_>, cfg: &TactsConfig) -> Result<EpisodeResult> {
    let sampler = InverseCdf::new(ChaCha8Rng::seed_from_u64(cfg.rng_seed));
    let policy = TactsPolicy::new(scenario.modalities.len(), *cfg, sampler)?;
    run_episode(scenario, policy, cfg.max_steps)
}
