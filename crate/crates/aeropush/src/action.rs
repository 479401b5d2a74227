//! Agent actions in [-1, 1]^4 and their mapping to bounded velocity
//! commands.
//!
//! The planar command is polar: `a1` sets speed via `(a1 + 1) / 2`, `a2`
//! sets the direction angle `theta_max * a2` in the body frame. `a3` and
//! `a4` scale vertical speed and yaw rate directly. With the default
//! `theta_max = pi` the direction covers the full circle, so backward
//! motion is reachable at `a2 = +/-1`; a smaller `theta_max` restricts the
//! command to the camera's field of view.

use crate::dynamics::ControlInput;
use crate::geometry::Vec3;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Action(pub [f64; 4]);

impl Action {
    pub const ZERO: Action = Action([0.0; 4]);
    pub const HOVER: Action = Action([-1.0, 0.0, 0.0, 0.0]);

    pub fn clamped(&self) -> Action {
        Action(self.0.map(|a| a.clamp(-1.0, 1.0)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ActionBounds {
    /// Max planar speed, m/s.
    pub s_xy_max: f64,
    /// Max vertical speed, m/s.
    pub s_z_max: f64,
    /// Max planar direction angle, rad.
    pub theta_max: f64,
    /// Max yaw rate, rad/s.
    pub yaw_rate_max: f64,
}

impl Default for ActionBounds {
    fn default() -> Self {
        Self {
            s_xy_max: 1.0,
            s_z_max: 0.5,
            theta_max: std::f64::consts::PI,
            yaw_rate_max: std::f64::consts::FRAC_PI_4,
        }
    }
}

/// Map a raw action to a bounded velocity command. Raw components outside
/// [-1, 1] are clamped first; planners emit unbounded perturbations.
pub fn map_action(action: &Action, bounds: &ActionBounds) -> ControlInput {
    let [a1, a2, a3, a4] = action.clamped().0;
    let speed = bounds.s_xy_max * (a1 + 1.0) / 2.0;
    let angle = bounds.theta_max * a2;
    ControlInput {
        v_d: Vec3::new(speed * angle.cos(), speed * angle.sin(), bounds.s_z_max * a3),
        yaw_rate_d: bounds.yaw_rate_max * a4,
    }
}
