//! Step many environments with domain-randomized friction, deterministically
//! and in parallel.

use crate::action::{Action, ActionBounds};
use crate::episode::{Episode, EpisodeConfig, EpisodeStats, ResetReason};
use crate::error::SimError;
use crate::observation::{CameraModel, Observation};
use crate::reward::{RewardBreakdown, RewardWeights};
use crate::rng::env_stream;
use crate::scene::{friction_schedule, SceneParams, VehicleGeometry};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct BatchConfig {
    pub n_envs: usize,
    pub base_seed: u64,
    /// When set, every environment uses this friction value instead of the
    /// two-range schedule.
    pub friction_override: Option<f64>,
    pub scene: SceneParams,
    pub geometry: VehicleGeometry,
    pub episode: EpisodeConfig,
    pub camera: CameraModel,
    pub bounds: ActionBounds,
    pub reward: RewardWeights,
}

impl Default for BatchConfig {
    fn default() -> Self {
        Self {
            n_envs: 32,
            base_seed: 0,
            friction_override: None,
            scene: SceneParams::default(),
            geometry: VehicleGeometry::default(),
            episode: EpisodeConfig::default(),
            camera: CameraModel::default(),
            bounds: ActionBounds::default(),
            reward: RewardWeights::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Transition {
    pub env_index: usize,
    pub observation: Observation,
    pub reward: RewardBreakdown,
    pub done: bool,
    pub reset_reason: Option<ResetReason>,
    /// Final stats for the episode that just ended, when done.
    pub stats: Option<EpisodeStats>,
}

pub struct BatchEnv {
    cfg: BatchConfig,
    envs: Vec<Episode>,
}

impl BatchEnv {
    /// Build the batch: env `i` gets the i-th scheduled friction value and
    /// its own counter-based RNG stream `(base_seed, i)`.
    pub fn new(cfg: BatchConfig) -> Result<Self, SimError> {
        cfg.scene.validate()?;
        let frictions: Vec<f64> = match cfg.friction_override {
            Some(mu) => vec![mu; cfg.n_envs],
            None => friction_schedule(cfg.n_envs)?,
        };
        let envs = frictions
            .iter()
            .enumerate()
            .map(|(i, &mu)| {
                let mut scene = cfg.scene.clone();
                scene.friction_mu = mu;
                Episode::new(
                    scene,
                    cfg.geometry.clone(),
                    cfg.episode,
                    cfg.camera.clone(),
                    cfg.bounds,
                    cfg.reward,
                    env_stream(cfg.base_seed, i as u64),
                )
            })
            .collect();
        Ok(Self { cfg, envs })
    }

    pub fn n_envs(&self) -> usize {
        self.cfg.n_envs
    }

    pub fn frictions(&self) -> Vec<f64> {
        self.envs.iter().map(|e| e.env.scene.friction_mu).collect()
    }

    pub fn envs(&self) -> &[Episode] {
        &self.envs
    }

    /// Reset every environment and return the initial observations.
    pub fn reset(&mut self) -> Vec<Observation> {
        self.envs.iter_mut().map(|e| e.reset()).collect()
    }

    /// Step all environments. Environments that finished on the previous
    /// call are reset first, so their returned transition belongs to a
    /// fresh episode.
    pub fn step(&mut self, actions: &[Action]) -> Result<Vec<Transition>, SimError> {
        if actions.len() != self.envs.len() {
            return Err(SimError::ActionArity {
                expected: self.envs.len(),
                got: actions.len(),
            });
        }
        self.envs
            .par_iter_mut()
            .zip(actions.par_iter())
            .enumerate()
            .map(|(i, (env, action))| {
                if env.is_done() {
                    env.reset();
                }
                let result = env.step(action)?;
                Ok(Transition {
                    env_index: i,
                    observation: result.observation,
                    reward: result.reward,
                    done: result.done,
                    reset_reason: result.reset_reason,
                    stats: result.done.then(|| *env.stats()),
                })
            })
            .collect()
    }
}
