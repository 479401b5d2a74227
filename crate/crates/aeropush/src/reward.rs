//! Reward algebra: the four shaping primitives and their composition into
//! the per-step reward
//!
//! ```text
//! r = f_neg(d_mo_xy, 2, 0.125) * (1 + f_pos(d_q, 1))
//!     + f_neg(d_mo_z, 2, 0.05)
//!     + f_delta(delta_d_og_xy, 1000)
//!     + f_impulse(d_og_xy, 1500, 0.025)
//! ```
//!
//! The tilt factor multiplies only the planar nav term. By default the
//! combined form is used verbatim; note that this makes the (negative)
//! planar term more negative when the vehicle is level, which reads as
//! inverted relative to the stated intent of emphasizing levelness near the
//! object. `RewardWeights::invert_tilt_coupling` selects the alternative
//! reading `f_neg * (2 - f_pos(d_q, 1))`.

use crate::error::SimError;
use crate::geometry::{planar_distance, tilt_metric};
use crate::scene::{GoalSpec, VehicleGeometry};
use crate::dynamics::{ObjectState, VehicleState};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RewardWeights {
    pub nav_xy_gamma: f64,
    pub nav_xy_tau: f64,
    pub nav_z_gamma: f64,
    pub nav_z_tau: f64,
    pub tilt_gamma: f64,
    /// Progress reward per meter of planar object-to-goal progress.
    pub progress_gamma: f64,
    pub completion_gamma: f64,
    pub completion_tau: f64,
    /// Use `(2 - f_pos(d_q, 1))` instead of `(1 + f_pos(d_q, 1))` as the
    /// tilt factor on the planar nav term.
    pub invert_tilt_coupling: bool,
}

impl Default for RewardWeights {
    fn default() -> Self {
        Self {
            nav_xy_gamma: 2.0,
            nav_xy_tau: 0.125,
            nav_z_gamma: 2.0,
            nav_z_tau: 0.05,
            tilt_gamma: 1.0,
            progress_gamma: 1000.0,
            completion_gamma: 1500.0,
            completion_tau: 0.025,
            invert_tilt_coupling: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RewardBreakdown {
    pub nav_xy_term: f64,
    pub nav_z_term: f64,
    pub tilt_factor: f64,
    pub progress_term: f64,
    pub completion_term: f64,
    pub total: f64,
}

/// Distances feeding the reward and observation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistanceSet {
    /// Planar arm-to-object distance, m.
    pub d_mo_xy: f64,
    /// Vertical arm-to-object distance, m.
    pub d_mo_z: f64,
    /// Planar object-to-goal distance, m.
    pub d_og_xy: f64,
    /// Signed planar progress since the previous step; positive when the
    /// object moved toward the goal.
    pub delta_d_og_xy: f64,
    /// Tilt metric, in [0, 2].
    pub d_q: f64,
}

/// `gamma / (1 + d^2)`, in (0, gamma], strictly decreasing in d.
pub fn f_pos(d: f64, gamma: f64) -> Result<f64, SimError> {
    if d < 0.0 {
        return Err(SimError::NegativeDistance(d));
    }
    Ok(gamma / (1.0 + d * d))
}

/// `f_pos(d, gamma) - gamma - 1` beyond the threshold, `-1` at or below it.
pub fn f_neg(d: f64, gamma: f64, tau: f64) -> Result<f64, SimError> {
    if d < 0.0 || tau < 0.0 {
        return Err(SimError::NegativeDistance(d.min(tau)));
    }
    if d <= tau {
        Ok(-1.0)
    } else {
        Ok(f_pos(d, gamma)? - gamma - 1.0)
    }
}

/// Linear progress reward; positive when the distance is decreasing.
pub fn f_delta(delta_d: f64, gamma: f64) -> f64 {
    gamma * delta_d
}

/// Sparse impulse: `gamma` strictly inside the threshold, else 0.
pub fn f_impulse(d: f64, gamma: f64, tau: f64) -> f64 {
    if d < tau {
        gamma
    } else {
        0.0
    }
}

/// Distances for the current step. `prev_d_og_xy` must come from the
/// previous step against the same goal; on a goal switch the caller
/// re-anchors it to the new goal's distance so no spurious progress spike is
/// emitted.
pub fn compute_distances(
    vehicle: &VehicleState,
    geom: &VehicleGeometry,
    object: &ObjectState,
    goal: &GoalSpec,
    prev_d_og_xy: f64,
) -> DistanceSet {
    let arm = vehicle.arm_position(geom);
    let d_og_xy = planar_distance(&object.position, &goal.position());
    DistanceSet {
        d_mo_xy: planar_distance(&arm, &object.position),
        d_mo_z: (arm.z - object.position.z).abs(),
        d_og_xy,
        delta_d_og_xy: prev_d_og_xy - d_og_xy,
        d_q: tilt_metric(&vehicle.orientation),
    }
}

pub fn step_reward(dist: &DistanceSet, weights: &RewardWeights) -> RewardBreakdown {
    let nav_xy = f_neg(dist.d_mo_xy, weights.nav_xy_gamma, weights.nav_xy_tau)
        .expect("distances are non-negative");
    let nav_z = f_neg(dist.d_mo_z, weights.nav_z_gamma, weights.nav_z_tau)
        .expect("distances are non-negative");
    let tilt = f_pos(dist.d_q, weights.tilt_gamma).expect("tilt metric is non-negative");
    let tilt_factor = if weights.invert_tilt_coupling {
        2.0 * weights.tilt_gamma - tilt
    } else {
        tilt
    };
    let progress = f_delta(dist.delta_d_og_xy, weights.progress_gamma);
    let completion = f_impulse(dist.d_og_xy, weights.completion_gamma, weights.completion_tau);
    RewardBreakdown {
        nav_xy_term: nav_xy,
        nav_z_term: nav_z,
        tilt_factor,
        progress_term: progress,
        completion_term: completion,
        total: nav_xy * (1.0 + tilt_factor) + nav_z + progress + completion,
    }
}
