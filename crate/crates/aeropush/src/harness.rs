//! Evaluation harness: episode runners, aggregate statistics, CSV export,
//! trajectory logs, and the NDJSON wire protocol for external agents.

use crate::action::Action;
use crate::agents::{scripted_policy, MppiPlanner, ScriptedParams};
use crate::batch::{BatchConfig, BatchEnv};
use crate::config::RunConfig;
use crate::dynamics::ContactReport;
use crate::episode::{Episode, EpisodeStats, GoalMode};
use crate::error::SimError;
use crate::observation::Observation;
use crate::reward::RewardBreakdown;
use crate::rng::env_stream;
use base64::Engine;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;
use std::io::{BufRead, Write};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum AgentKind {
    /// Commands zero velocity every step (raw action [-1, 0, 0, 0]).
    Zero,
    Scripted,
    Mppi,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct EvalConfig {
    pub friction_values: Vec<f64>,
    pub episodes_per_value: usize,
    pub goal_mode: GoalMode,
    pub agent: AgentKind,
    pub seed: u64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            friction_values: vec![0.2, 0.3, 0.4, 0.5, 0.6],
            episodes_per_value: 100,
            goal_mode: GoalMode::Alternating,
            agent: AgentKind::Scripted,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalRow {
    pub friction: f64,
    pub episodes: usize,
    pub mean_goals: f64,
    pub std_goals: f64,
    pub mean_reward: f64,
    pub collision_rate: f64,
}

/// A per-step trajectory record for the plotting CSV.
#[derive(Debug, Clone)]
pub struct TrajectoryRecord {
    pub time: f64,
    pub vehicle_position: [f64; 3],
    pub vehicle_yaw: f64,
    pub object_position: [f64; 3],
    pub goal_position: [f64; 3],
    pub action: Action,
    pub reward: RewardBreakdown,
    pub contact: ContactReport,
}

/// A policy driving one episode.
pub enum Agent {
    Zero,
    Scripted(ScriptedParams),
    Mppi(Box<MppiPlanner>, ChaCha8Rng),
}

impl Agent {
    pub fn from_kind(kind: AgentKind, run: &RunConfig, planner_seed: u64) -> Agent {
        match kind {
            AgentKind::Zero => Agent::Zero,
            AgentKind::Scripted => Agent::Scripted(run.scripted),
            AgentKind::Mppi => Agent::Mppi(
                Box::new(MppiPlanner::new(run.mppi)),
                env_stream(planner_seed, u64::MAX),
            ),
        }
    }

    pub fn act(&mut self, episode: &Episode, obs: &Observation) -> Action {
        match self {
            Agent::Zero => Action::HOVER,
            Agent::Scripted(params) => scripted_policy(obs, params, &episode.bounds),
            Agent::Mppi(planner, rng) => planner.plan(episode, rng),
        }
    }
}

/// Run one episode to termination, optionally recording each step.
pub fn run_episode(
    episode: &mut Episode,
    agent: &mut Agent,
    record: bool,
) -> (EpisodeStats, Vec<TrajectoryRecord>) {
    let mut obs = episode.reset();
    let mut log = Vec::new();
    let dt = episode.cfg.dt;
    let mut t = 0.0;
    while !episode.is_done() {
        let action = agent.act(episode, &obs);
        let result = episode.step(&action).expect("episode not done");
        t += dt;
        if record {
            let v = &episode.env.vehicle;
            let o = &episode.env.object;
            log.push(TrajectoryRecord {
                time: t,
                vehicle_position: [v.position.x, v.position.y, v.position.z],
                vehicle_yaw: v.yaw,
                object_position: [o.position.x, o.position.y, o.position.z],
                goal_position: result.goal.position,
                action,
                reward: result.reward,
                contact: result.contact,
            });
        }
        obs = result.observation;
    }
    (*episode.stats(), log)
}

fn make_episode(run: &RunConfig, mu: f64, goal_mode: GoalMode, seed: u64, stream: u64) -> Episode {
    let mut scene = run.scene.clone();
    scene.friction_mu = mu;
    let mut cfg = run.episode;
    cfg.goal_mode = goal_mode;
    cfg.training_mode = false;
    cfg.render_depth = false;
    Episode::new(
        scene,
        run.geometry.clone(),
        cfg,
        run.camera.clone(),
        run.bounds,
        run.reward,
        env_stream(seed, stream),
    )
}

/// Evaluate an agent over `episodes_per_value` independent evaluation-mode
/// episodes per friction value. Deterministic for a fixed seed.
pub fn run_eval(cfg: &EvalConfig, run: &RunConfig) -> Vec<EvalRow> {
    let mut rows: Vec<EvalRow> = cfg
        .friction_values
        .iter()
        .enumerate()
        .map(|(mu_idx, &mu)| {
            let stats: Vec<EpisodeStats> = (0..cfg.episodes_per_value)
                .into_par_iter()
                .map(|e| {
                    let stream = (mu_idx * cfg.episodes_per_value + e) as u64;
                    let mut episode = make_episode(run, mu, cfg.goal_mode, cfg.seed, stream);
                    let mut agent = Agent::from_kind(cfg.agent, run, cfg.seed.wrapping_add(stream));
                    run_episode(&mut episode, &mut agent, false).0
                })
                .collect();
            summarize(mu, &stats)
        })
        .collect();
    rows.sort_by(|a, b| a.friction.partial_cmp(&b.friction).unwrap());
    rows
}

/// Mean/population-std aggregation of per-episode stats.
pub fn summarize(friction: f64, stats: &[EpisodeStats]) -> EvalRow {
    let n = stats.len() as f64;
    let mean_goals = stats.iter().map(|s| s.goals_completed as f64).sum::<f64>() / n;
    let var = stats
        .iter()
        .map(|s| (s.goals_completed as f64 - mean_goals).powi(2))
        .sum::<f64>()
        / n;
    EvalRow {
        friction,
        episodes: stats.len(),
        mean_goals,
        std_goals: var.sqrt(),
        mean_reward: stats.iter().map(|s| s.total_reward).sum::<f64>() / n,
        collision_rate: stats.iter().filter(|s| s.collided).count() as f64 / n,
    }
}

/// Fixed-point CSV, one row per friction value, ascending.
pub fn export_csv(rows: &[EvalRow]) -> Result<String, SimError> {
    if rows.is_empty() {
        return Err(SimError::InvalidConfig("no evaluation rows to export".into()));
    }
    let mut out = String::from("friction,episodes,mean_goals,std_goals,mean_reward,collision_rate\n");
    let mut sorted: Vec<&EvalRow> = rows.iter().collect();
    sorted.sort_by(|a, b| a.friction.partial_cmp(&b.friction).unwrap());
    for r in sorted {
        out.push_str(&format!(
            "{:.6},{},{:.6},{:.6},{:.6},{:.6}\n",
            r.friction, r.episodes, r.mean_goals, r.std_goals, r.mean_reward, r.collision_rate
        ));
    }
    Ok(out)
}

/// Per-step trajectory CSV; positions serialize with full round-trip
/// precision.
pub fn export_trajectory(log: &[TrajectoryRecord]) -> String {
    let mut out = String::from(
        "time,vehicle_x,vehicle_y,vehicle_z,vehicle_yaw,object_x,object_y,object_z,\
         goal_x,goal_y,goal_z,a1,a2,a3,a4,nav_xy_term,nav_z_term,tilt_factor,progress_term,\
         completion_term,reward_total,arm_contact,cage_contact,vehicle_collision,object_on_table\n",
    );
    for r in log {
        let [vx, vy, vz] = r.vehicle_position;
        let [ox, oy, oz] = r.object_position;
        let [gx, gy, gz] = r.goal_position;
        let [a1, a2, a3, a4] = r.action.0;
        out.push_str(&format!(
            "{},{vx},{vy},{vz},{},{ox},{oy},{oz},{gx},{gy},{gz},{a1},{a2},{a3},{a4},{},{},{},{},{},{},{},{},{},{}\n",
            r.time,
            r.vehicle_yaw,
            r.reward.nav_xy_term,
            r.reward.nav_z_term,
            r.reward.tilt_factor,
            r.reward.progress_term,
            r.reward.completion_term,
            r.reward.total,
            r.contact.arm_object.is_some() as u8,
            r.contact.cage_object.is_some() as u8,
            r.contact.vehicle_env_collision as u8,
            r.contact.object_on_table as u8,
        ));
    }
    out
}

/// One NDJSON protocol session over a batch of environments. Strict
/// request-response alternation; malformed input yields a structured error
/// and the session continues.
pub struct ProtocolSession {
    batch_cfg: BatchConfig,
    batch: Option<BatchEnv>,
    include_depth: bool,
}

impl ProtocolSession {
    pub fn new(batch_cfg: BatchConfig, include_depth: bool) -> Self {
        Self { batch_cfg, batch: None, include_depth }
    }

    fn observation_json(&self, obs: &Observation) -> serde_json::Value {
        let mut v = json!({ "scalars": obs.scalar_vector() });
        if self.include_depth {
            if let Some(depth) = &obs.depth {
                let mut buf = Vec::new();
                depth.write_binary(&mut buf).expect("in-memory write");
                v["depth"] = json!(base64::engine::general_purpose::STANDARD.encode(buf));
            }
        }
        v
    }

    /// Handle one request line, producing one response line (no trailing
    /// newline). Returns `(response, close)`.
    pub fn handle_line(&mut self, line: &str) -> (String, bool) {
        let parsed: serde_json::Value = match serde_json::from_str(line) {
            Ok(v) => v,
            Err(e) => return (json!({ "error": format!("malformed json: {e}") }).to_string(), false),
        };
        let cmd = parsed.get("cmd").and_then(|c| c.as_str()).unwrap_or("");
        match cmd {
            "reset" => {
                let seed = parsed.get("seed").and_then(|s| s.as_u64()).unwrap_or(0);
                let mut cfg = self.batch_cfg.clone();
                cfg.base_seed = seed;
                cfg.episode.render_depth = self.include_depth;
                match BatchEnv::new(cfg) {
                    Ok(mut batch) => {
                        let observations: Vec<_> =
                            batch.reset().iter().map(|o| self.observation_json(o)).collect();
                        self.batch = Some(batch);
                        (json!({ "observations": observations }).to_string(), false)
                    }
                    Err(e) => (json!({ "error": e.to_string() }).to_string(), false),
                }
            }
            "step" => {
                let Some(batch) = self.batch.as_mut() else {
                    return (json!({ "error": "step before reset" }).to_string(), false);
                };
                let Some(raw) = parsed.get("actions").and_then(|a| a.as_array()) else {
                    return (json!({ "error": "missing actions array" }).to_string(), false);
                };
                if raw.len() != batch.n_envs() {
                    return (
                        json!({ "error": format!(
                            "expected {} actions, got {}", batch.n_envs(), raw.len()) })
                        .to_string(),
                        false,
                    );
                }
                let mut actions = Vec::with_capacity(raw.len());
                for (i, a) in raw.iter().enumerate() {
                    let comps: Option<Vec<f64>> = a
                        .as_array()
                        .map(|v| v.iter().filter_map(|x| x.as_f64()).collect());
                    match comps {
                        Some(c) if c.len() == 4 => actions.push(Action([c[0], c[1], c[2], c[3]])),
                        _ => {
                            return (
                                json!({ "error": format!(
                                    "action for env {i} must have 4 numeric components") })
                                .to_string(),
                                false,
                            )
                        }
                    }
                }
                match batch.step(&actions) {
                    Ok(transitions) => {
                        let ts: Vec<_> = transitions
                            .iter()
                            .map(|t| {
                                let mut v = json!({
                                    "env": t.env_index,
                                    "observation": self.observation_json(&t.observation),
                                    "reward_total": t.reward.total,
                                    "reward": t.reward,
                                    "done": t.done,
                                });
                                if let Some(reason) = t.reset_reason {
                                    v["reset_reason"] = json!(format!("{reason:?}"));
                                }
                                v
                            })
                            .collect();
                        (json!({ "transitions": ts }).to_string(), false)
                    }
                    Err(e) => (json!({ "error": e.to_string() }).to_string(), false),
                }
            }
            "close" => (json!({ "ok": true }).to_string(), true),
            other => (json!({ "error": format!("unknown command: {other:?}") }).to_string(), false),
        }
    }

    /// Serve a full session over any line-based transport.
    pub fn serve<R: BufRead, W: Write>(&mut self, reader: R, mut writer: W) -> Result<(), SimError> {
        for line in reader.lines() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let (response, close) = self.handle_line(&line);
            writer.write_all(response.as_bytes())?;
            writer.write_all(b"\n")?;
            writer.flush()?;
            if close {
                break;
            }
        }
        Ok(())
    }
}
