//! Environment geometry, per-environment parameters, and the
//! domain-randomization friction schedule.

use crate::error::SimError;
use crate::geometry::Vec3;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Friction ranges assigned across a training batch.
pub const FRICTION_LOW_RANGE: (f64, f64) = (0.05, 0.3);
pub const FRICTION_HIGH_RANGE: (f64, f64) = (0.55, 0.8);

/// Minimum separation between consecutive random goals, meters.
pub const GOAL_MIN_SEPARATION: f64 = 0.15;
/// Planar distance at which a goal counts as completed, meters.
pub const GOAL_COMPLETION_RADIUS: f64 = 0.025;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SceneParams {
    /// Half-extent of the cubic room, meters (2.5 => a 5 m room).
    pub room_half_extent: f64,
    pub table_center_x: f64,
    pub table_center_y: f64,
    /// Table-top size along x and y, meters.
    pub table_size_x: f64,
    pub table_size_y: f64,
    pub table_height: f64,
    /// Edge length of the pushed cube, meters.
    pub object_edge: f64,
    pub object_mass: f64,
    /// Coulomb friction coefficient between object and table.
    pub friction_mu: f64,
    pub gravity: f64,
}

impl Default for SceneParams {
    fn default() -> Self {
        Self {
            room_half_extent: 2.5,
            table_center_x: 0.0,
            table_center_y: 0.0,
            table_size_x: 0.8,
            table_size_y: 0.8,
            table_height: 0.5,
            object_edge: 0.1,
            object_mass: 0.5,
            friction_mu: 0.4,
            gravity: 9.81,
        }
    }
}

impl SceneParams {
    pub fn table_center(&self) -> Vec3 {
        Vec3::new(self.table_center_x, self.table_center_y, self.table_height / 2.0)
    }

    /// World z of the table surface.
    pub fn table_top_z(&self) -> f64 {
        self.table_height
    }

    /// World z of the cube center while it rests on the table.
    pub fn object_rest_z(&self) -> f64 {
        self.table_height + self.object_edge / 2.0
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if self.object_edge <= 0.0 || self.object_mass <= 0.0 || self.friction_mu <= 0.0 {
            return Err(SimError::InvalidConfig(
                "object_edge, object_mass and friction_mu must be positive".into(),
            ));
        }
        let fits_x = self.table_center_x.abs() + self.table_size_x / 2.0 <= self.room_half_extent;
        let fits_y = self.table_center_y.abs() + self.table_size_y / 2.0 <= self.room_half_extent;
        if !fits_x || !fits_y {
            return Err(SimError::InvalidConfig("table does not fit inside room".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VehicleGeometry {
    /// Radius of the spherical collision cage, meters.
    pub body_radius: f64,
    /// Position of the arm-frame origin `p_m` in the body frame.
    pub arm_offset_x: f64,
    pub arm_offset_y: f64,
    pub arm_offset_z: f64,
    /// Exposed arm length; half of it (0.125 m) is the planar nav threshold.
    pub arm_exposed_length: f64,
    pub arm_radius: f64,
}

impl Default for VehicleGeometry {
    fn default() -> Self {
        Self {
            body_radius: 0.25,
            arm_offset_x: 0.35,
            arm_offset_y: 0.0,
            arm_offset_z: 0.0,
            arm_exposed_length: 0.25,
            arm_radius: 0.01,
        }
    }
}

impl VehicleGeometry {
    pub fn arm_offset_body(&self) -> Vec3 {
        Vec3::new(self.arm_offset_x, self.arm_offset_y, self.arm_offset_z)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GoalSpec {
    pub position: [f64; 3],
    pub completion_radius: f64,
}

impl GoalSpec {
    pub fn new(position: Vec3) -> Self {
        Self {
            position: [position.x, position.y, position.z],
            completion_radius: GOAL_COMPLETION_RADIUS,
        }
    }

    pub fn position(&self) -> Vec3 {
        Vec3::new(self.position[0], self.position[1], self.position[2])
    }
}

/// The two fixed endpoints of the alternating-goal task, 0.5 m apart along x
/// and centered on the table, at object rest height.
pub fn alternating_endpoints(scene: &SceneParams) -> (GoalSpec, GoalSpec) {
    let z = scene.object_rest_z();
    let a = GoalSpec::new(Vec3::new(scene.table_center_x - 0.25, scene.table_center_y, z));
    let b = GoalSpec::new(Vec3::new(scene.table_center_x + 0.25, scene.table_center_y, z));
    (a, b)
}

/// Evenly spaced friction values: half the batch in [0.05, 0.3], half in
/// [0.55, 0.8], each half an inclusive linspace, ascending overall.
pub fn friction_schedule(n_envs: usize) -> Result<Vec<f64>, SimError> {
    if n_envs < 2 || n_envs % 2 != 0 {
        return Err(SimError::InvalidConfig(format!(
            "friction schedule needs an even env count >= 2, got {n_envs}"
        )));
    }
    let half = n_envs / 2;
    let mut values = Vec::with_capacity(n_envs);
    for (lo, hi) in [FRICTION_LOW_RANGE, FRICTION_HIGH_RANGE] {
        if half == 1 {
            values.push(lo);
        } else {
            for i in 0..half {
                values.push(lo + (hi - lo) * i as f64 / (half - 1) as f64);
            }
        }
    }
    Ok(values)
}

/// Flip to the other fixed endpoint.
pub fn alternating_goal(current: &GoalSpec, scene: &SceneParams) -> GoalSpec {
    let (a, b) = alternating_endpoints(scene);
    let pos = current.position();
    if (pos - a.position()).norm() < (pos - b.position()).norm() {
        b
    } else {
        a
    }
}

/// Uniform sample over the table top inset by half the object edge, rejected
/// until at least 0.15 m from the previous goal.
pub fn random_goal<R: Rng>(
    rng: &mut R,
    scene: &SceneParams,
    previous: &GoalSpec,
) -> Result<GoalSpec, SimError> {
    let inset = scene.object_edge / 2.0;
    let half_x = scene.table_size_x / 2.0 - inset;
    let half_y = scene.table_size_y / 2.0 - inset;
    if half_x <= 0.0 || half_y <= 0.0 {
        return Err(SimError::DegenerateGeometry(
            "table top too small for goal sampling".into(),
        ));
    }
    let prev = previous.position();
    for _ in 0..1000 {
        let x = scene.table_center_x + rng.gen_range(-half_x..=half_x);
        let y = scene.table_center_y + rng.gen_range(-half_y..=half_y);
        let pos = Vec3::new(x, y, scene.object_rest_z());
        if (pos - prev).xy().norm() >= GOAL_MIN_SEPARATION {
            return Ok(GoalSpec::new(pos));
        }
    }
    Err(SimError::DegenerateGeometry(
        "could not place a goal 0.15 m from the previous one".into(),
    ))
}
