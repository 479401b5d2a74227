//! Episode lifecycle: goal scheduling, termination, reset, and the
//! single-environment step loop.

use crate::action::{map_action, Action, ActionBounds};
use crate::dynamics::{env_step, ContactReport, EnvState, ObjectState, VehicleState};
use crate::error::SimError;
use crate::geometry::Vec3;
use crate::observation::{assemble_observation, CameraModel, Observation};
use crate::reward::{compute_distances, step_reward, RewardBreakdown, RewardWeights};
use crate::scene::{
    alternating_endpoints, alternating_goal, random_goal, GoalSpec, SceneParams, VehicleGeometry,
};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GoalMode {
    Alternating,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EpisodeConfig {
    pub max_steps: usize,
    pub dt: f64,
    /// Consecutive collision time before a training reset, seconds.
    pub collision_grace: f64,
    /// Consecutive off-table time before a reset, seconds.
    pub off_table_grace: f64,
    /// Vehicle distance from the world origin that ends the episode.
    pub escape_radius: f64,
    pub goal_mode: GoalMode,
    /// Collision resets fire only in training mode; evaluation leaves the
    /// vehicle running.
    pub training_mode: bool,
    /// Render a depth image into each observation.
    pub render_depth: bool,
}

impl Default for EpisodeConfig {
    fn default() -> Self {
        Self {
            max_steps: 1000,
            dt: 0.1,
            collision_grace: 2.0,
            off_table_grace: 2.0,
            escape_radius: 5.0,
            goal_mode: GoalMode::Alternating,
            training_mode: true,
            render_depth: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ResetReason {
    TimeLimit,
    VehicleCollision,
    ObjectOffTable,
    EscapedRadius,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpisodeStats {
    pub goals_completed: usize,
    pub steps: usize,
    pub total_reward: f64,
    pub collided: bool,
    pub reset_reason: Option<ResetReason>,
}

impl EpisodeStats {
    fn new() -> Self {
        Self { goals_completed: 0, steps: 0, total_reward: 0.0, collided: false, reset_reason: None }
    }
}

/// Step-level output of an episode.
#[derive(Debug, Clone)]
pub struct StepResult {
    pub observation: Observation,
    pub reward: RewardBreakdown,
    pub done: bool,
    pub contact: ContactReport,
    pub goal: GoalSpec,
    pub goal_completed: bool,
    pub reset_reason: Option<ResetReason>,
}

/// Termination check over the episode timers. Checked in order: collision,
/// off-table, escape radius, time limit.
pub fn check_termination(
    steps: usize,
    collision_steps: usize,
    off_table_steps: usize,
    vehicle_position: &Vec3,
    cfg: &EpisodeConfig,
) -> Option<ResetReason> {
    let collision_limit = (cfg.collision_grace / cfg.dt).round() as usize;
    let off_table_limit = (cfg.off_table_grace / cfg.dt).round() as usize;
    if cfg.training_mode && collision_steps >= collision_limit {
        return Some(ResetReason::VehicleCollision);
    }
    if off_table_steps >= off_table_limit {
        return Some(ResetReason::ObjectOffTable);
    }
    if vehicle_position.norm() > cfg.escape_radius {
        return Some(ResetReason::EscapedRadius);
    }
    if steps >= cfg.max_steps {
        return Some(ResetReason::TimeLimit);
    }
    None
}

/// A single environment with its goal scheduler, timers and RNG stream.
#[derive(Debug, Clone)]
pub struct Episode {
    pub env: EnvState,
    pub cfg: EpisodeConfig,
    pub camera: CameraModel,
    pub bounds: ActionBounds,
    pub weights: RewardWeights,
    pub goal: GoalSpec,
    pub prev_d_og_xy: f64,
    steps: usize,
    collision_steps: usize,
    off_table_steps: usize,
    stats: EpisodeStats,
    rng: ChaCha8Rng,
    done: bool,
}

impl Episode {
    pub fn new(
        scene: SceneParams,
        geom: VehicleGeometry,
        cfg: EpisodeConfig,
        camera: CameraModel,
        bounds: ActionBounds,
        weights: RewardWeights,
        rng: ChaCha8Rng,
    ) -> Self {
        let env = EnvState {
            vehicle: VehicleState::at_rest(Vec3::zeros(), 0.0),
            object: ObjectState::resting(Vec3::zeros()),
            scene,
            geom,
        };
        let mut episode = Self {
            env,
            cfg,
            camera,
            bounds,
            weights,
            goal: GoalSpec::new(Vec3::zeros()),
            prev_d_og_xy: 0.0,
            steps: 0,
            collision_steps: 0,
            off_table_steps: 0,
            stats: EpisodeStats::new(),
            rng,
            done: false,
        };
        episode.reset();
        episode
    }

    /// Reset to the fixed start pose and the first goal. Returns the first
    /// observation. The per-env RNG stream is not reseeded here; pass a
    /// fresh stream to `reseed` for reproducible episode sequences.
    pub fn reset(&mut self) -> Observation {
        let scene = &self.env.scene;
        let (start_goal, first_goal) = alternating_endpoints(scene);
        let object_start = match self.cfg.goal_mode {
            // Alternating: object starts at one endpoint, first goal at the
            // opposite one, 0.5 m away.
            GoalMode::Alternating => start_goal.position(),
            GoalMode::Random => {
                Vec3::new(scene.table_center_x, scene.table_center_y, scene.object_rest_z())
            }
        };
        self.env.object = ObjectState::resting(object_start);
        // Vehicle 1 m behind the object, facing it, arm at object height.
        self.env.vehicle = VehicleState::at_rest(
            Vec3::new(object_start.x - 1.0, object_start.y, object_start.z),
            0.0,
        );
        self.goal = match self.cfg.goal_mode {
            GoalMode::Alternating => first_goal,
            GoalMode::Random => {
                random_goal(&mut self.rng, scene, &GoalSpec::new(object_start))
                    .expect("default table admits goal sampling")
            }
        };
        self.prev_d_og_xy = crate::geometry::planar_distance(
            &self.env.object.position,
            &self.goal.position(),
        );
        self.steps = 0;
        self.collision_steps = 0;
        self.off_table_steps = 0;
        self.stats = EpisodeStats::new();
        self.done = false;
        let dist = compute_distances(
            &self.env.vehicle,
            &self.env.geom,
            &self.env.object,
            &self.goal,
            self.prev_d_og_xy,
        );
        assemble_observation(&self.env, &self.goal, &dist, &self.camera, self.cfg.render_depth)
    }

    pub fn reseed(&mut self, rng: ChaCha8Rng) {
        self.rng = rng;
    }

    pub fn is_done(&self) -> bool {
        self.done
    }

    pub fn stats(&self) -> &EpisodeStats {
        &self.stats
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Advance one step. Errors if the episode is already done.
    pub fn step(&mut self, action: &Action) -> Result<StepResult, SimError> {
        if self.done {
            return Err(SimError::EpisodeDone);
        }
        let u = map_action(action, &self.bounds);
        let contact = env_step(&mut self.env, &u, self.cfg.dt);

        if contact.vehicle_env_collision {
            self.collision_steps += 1;
            self.stats.collided = true;
        } else {
            self.collision_steps = 0;
        }
        if self.env.object.on_table {
            self.off_table_steps = 0;
        } else {
            self.off_table_steps += 1;
        }

        let dist = compute_distances(
            &self.env.vehicle,
            &self.env.geom,
            &self.env.object,
            &self.goal,
            self.prev_d_og_xy,
        );
        let reward = step_reward(&dist, &self.weights);

        let goal_completed = dist.d_og_xy < self.goal.completion_radius;
        let mut obs_dist = dist;
        if goal_completed {
            self.stats.goals_completed += 1;
            self.goal = match self.cfg.goal_mode {
                GoalMode::Alternating => alternating_goal(&self.goal, &self.env.scene),
                GoalMode::Random => random_goal(&mut self.rng, &self.env.scene, &self.goal)
                    .expect("default table admits goal sampling"),
            };
            // Re-anchor progress against the new goal so no spurious
            // f_delta spike is emitted on the switch.
            self.prev_d_og_xy = crate::geometry::planar_distance(
                &self.env.object.position,
                &self.goal.position(),
            );
            // The observation must describe the new goal; its delta is zero
            // on the switch step.
            obs_dist = compute_distances(
                &self.env.vehicle,
                &self.env.geom,
                &self.env.object,
                &self.goal,
                self.prev_d_og_xy,
            );
        } else {
            self.prev_d_og_xy = dist.d_og_xy;
        }

        self.steps += 1;
        self.stats.steps = self.steps;
        self.stats.total_reward += reward.total;

        let reset_reason = check_termination(
            self.steps,
            self.collision_steps,
            self.off_table_steps,
            &self.env.vehicle.position,
            &self.cfg,
        );
        if reset_reason.is_some() {
            self.done = true;
            self.stats.reset_reason = reset_reason;
        }

        let observation = assemble_observation(
            &self.env,
            &self.goal,
            &obs_dist,
            &self.camera,
            self.cfg.render_depth,
        );
        Ok(StepResult {
            observation,
            reward,
            done: self.done,
            contact,
            goal: self.goal,
            goal_completed,
            reset_reason,
        })
    }
}

impl Default for Episode {
    fn default() -> Self {
        Self::new(
            SceneParams::default(),
            VehicleGeometry::default(),
            EpisodeConfig::default(),
            CameraModel::default(),
            ActionBounds::default(),
            RewardWeights::default(),
            crate::rng::env_stream(0, 0),
        )
    }
}
