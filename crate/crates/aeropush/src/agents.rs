//! Baseline controllers: a scripted approach-and-push policy working purely
//! from the observation vector, and an MPPI planner that rolls out the
//! simulator itself as its model.

use crate::action::{Action, ActionBounds};
use crate::episode::Episode;
use crate::observation::Observation;
use nalgebra::Vector2;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScriptedParams {
    /// Standoff distance behind the object along the object-to-goal line.
    pub standoff: f64,
    pub approach_speed_frac: f64,
    pub push_speed_frac: f64,
    /// Lateral tolerance from the push line before committing to the push.
    pub align_tolerance: f64,
    /// Vertical proportional gain on the arm-to-object height error.
    pub climb_gain: f64,
    /// Clearance radius used to detour around the object while approaching.
    pub avoid_radius: f64,
    /// Planar distance from the arm center back to the vehicle body center;
    /// the body sweeps this far behind the point being steered.
    pub body_setback: f64,
    /// Proportional gain turning the bearing of the push direction into a
    /// yaw-rate command; the arm only pushes along body +x, so the body must
    /// face the push direction.
    pub yaw_gain: f64,
}

impl Default for ScriptedParams {
    fn default() -> Self {
        Self {
            standoff: 0.15,
            approach_speed_frac: 0.5,
            push_speed_frac: 0.35,
            align_tolerance: 0.04,
            climb_gain: 2.0,
            avoid_radius: 0.45,
            body_setback: 0.475,
            yaw_gain: 2.0,
        }
    }
}

/// Reconstruct the planar goal position in the arm frame from the
/// observation. The goal direction is known but not its distance; the
/// object position and object-to-goal distance pin it down:
/// `|d * u_mg - obj|^2 = d_og^2` is a quadratic in `d`.
fn goal_in_arm_frame(obs: &Observation) -> Vector2<f64> {
    let obj = Vector2::new(obs.u_mo[0] * obs.d_mo, obs.u_mo[1] * obs.d_mo);
    let u = Vector2::new(obs.u_mg_xy[0], obs.u_mg_xy[1]);
    let b = u.dot(&obj);
    let disc = (b * b - obj.norm_squared() + obs.d_og_xy * obs.d_og_xy).max(0.0);
    u * (b + disc.sqrt())
}

/// Emit the action encoding a planar direction and speed fraction in the
/// body frame, plus vertical and yaw rates.
fn encode_action(
    dir: Vector2<f64>,
    speed_frac: f64,
    vz_frac: f64,
    yaw_frac: f64,
    bounds: &ActionBounds,
) -> Action {
    let angle = dir.y.atan2(dir.x);
    Action([
        (2.0 * speed_frac - 1.0).clamp(-1.0, 1.0),
        (angle / bounds.theta_max).clamp(-1.0, 1.0),
        vz_frac.clamp(-1.0, 1.0),
        yaw_frac.clamp(-1.0, 1.0),
    ])
}

/// Scripted approach-and-push baseline. Flies to a standoff point on the
/// far side of the object from the goal, then pushes straight through the
/// object toward the goal; falls back to re-approach whenever alignment is
/// lost.
pub fn scripted_policy(obs: &Observation, params: &ScriptedParams, bounds: &ActionBounds) -> Action {
    let obj = Vector2::new(obs.u_mo[0] * obs.d_mo, obs.u_mo[1] * obs.d_mo);
    let vz = (params.climb_gain * obs.u_mo[2] * obs.d_mo).clamp(-1.0, 1.0);

    if obs.d_og_xy < 0.025 {
        return Action::HOVER;
    }

    let goal = goal_in_arm_frame(obs);
    let push_dir = {
        let d = goal - obj;
        let n = d.norm();
        if n < 1e-9 {
            return Action::HOVER;
        }
        d / n
    };

    // The arm only pushes along body +x; yaw until the push direction has
    // zero bearing in this frame. Near the ±pi cut, always turn one way.
    let mut bearing = push_dir.y.atan2(push_dir.x);
    if bearing < -(std::f64::consts::PI - 0.1) {
        bearing += 2.0 * std::f64::consts::PI;
    }
    let yaw = params.yaw_gain * bearing;

    // Arm is at the origin of this frame.
    let along = obj.dot(&push_dir); // >0 when the object is ahead of the arm
    let lateral_vec = obj - push_dir * along;
    let lateral = lateral_vec.norm();
    let aligned = along > 0.0 && lateral <= params.align_tolerance && bearing.abs() < 0.2;
    // Once contact range is reached, keep pushing through modest lateral
    // error and steer sideways to re-center instead of backing off; bailing
    // out mid-contact drags the object around.
    let tracking =
        along > 0.0 && obj.norm() < 0.3 && lateral < 3.0 * params.align_tolerance && bearing.abs() < 0.4;

    if aligned || tracking {
        // Slow down as the object nears the goal so the push does not coast past it.
        let speed = params.push_speed_frac * (obs.d_og_xy / 0.2).clamp(0.15, 1.0);
        let dir = (push_dir + lateral_vec * 4.0).normalize();
        return encode_action(dir, speed, vz, yaw, bounds);
    }

    // Approach the standoff point behind the object.
    let standoff_pt = obj - push_dir * params.standoff;
    let dist = standoff_pt.norm();
    if dist < 1e-9 {
        return encode_action(push_dir, params.push_speed_frac * 0.5, vz, yaw, bounds);
    }
    let dir = standoff_pt / dist;

    // Inside the cone behind the push line the pushing stance necessarily
    // brings the body close to the object, so avoidance is off and we creep
    // into alignment. Requires the body to already face the push direction.
    // Yawing swings the arm sideways at omega * setback; subtract that from
    // the commanded body velocity so the arm actually tracks the standoff.
    let in_cone =
        along > 0.0 && lateral < 0.15 && obj.norm() < 0.6 && bearing.abs() < 0.3;
    if in_cone {
        let speed = params.approach_speed_frac * (dist / 0.3).clamp(0.2, 0.6);
        let omega = yaw.clamp(-1.0, 1.0) * bounds.yaw_rate_max;
        let v = dir * (speed * bounds.s_xy_max)
            - Vector2::new(0.0, params.body_setback * omega);
        let v_norm = v.norm();
        if v_norm < 1e-9 {
            return encode_action(push_dir, 0.0, vz, yaw, bounds);
        }
        return encode_action(v / v_norm, v_norm / bounds.s_xy_max, vz, yaw, bounds);
    }

    // Keep-out circles around the object for the arm and for the trailing
    // body center; both translate with the commanded velocity.
    let constraints = [
        (obj, 0.2),
        (obj + Vector2::new(params.body_setback, 0.0), params.avoid_radius),
    ];
    let mut worst: Option<(Vector2<f64>, f64, f64)> = None;
    for (rel, radius) in constraints {
        let along_path = rel.dot(&dir).clamp(0.0, dist);
        let seg_clear = (rel - dir * along_path).norm();
        let violation = radius - seg_clear;
        if violation > 0.0 && worst.is_none_or(|(_, _, v)| violation > v) {
            worst = Some((rel, radius, violation));
        }
    }

    let Some((c, _, _)) = worst else {
        let speed = params.approach_speed_frac * (dist / 0.3).clamp(0.25, 1.0);
        return encode_action(dir, speed, vz, yaw, bounds);
    };

    // Orbit the blocking circle: steer tangentially, going around on the
    // side we are already on, pushed outward by every circle whose buffer we
    // are currently inside.
    let r = c.norm().max(1e-9);
    let u = -c / r; // obstacle -> steered point
    let t = dir * dist - c; // obstacle -> target
    let side = if u.x * t.y - u.y * t.x >= 0.0 { 1.0 } else { -1.0 };
    let mut steer = Vector2::new(-u.y, u.x) * side;
    for (rel, radius) in constraints {
        let rc = rel.norm().max(1e-9);
        if rc < radius + 0.05 {
            steer += -rel / rc * (3.0 * ((radius + 0.05 - rc) / radius));
        }
    }
    let steer = steer.normalize();
    encode_action(steer, params.approach_speed_frac * 0.7, vz, yaw, bounds)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MppiConfig {
    pub horizon: usize,
    pub samples: usize,
    pub temperature: f64,
    pub noise_sigma: f64,
    pub iterations: usize,
    /// Plan with a deliberately wrong friction value to probe robustness.
    pub model_friction_override: Option<f64>,
}

impl Default for MppiConfig {
    fn default() -> Self {
        Self {
            horizon: 20,
            samples: 256,
            temperature: 1.0,
            noise_sigma: 0.3,
            iterations: 1,
            model_friction_override: None,
        }
    }
}

/// Diagnostics from one planning call.
#[derive(Debug, Clone)]
pub struct MppiReport {
    pub action: Action,
    pub returns: Vec<f64>,
    pub weights: Vec<f64>,
    pub sample_first_actions: Vec<Action>,
}

pub struct MppiPlanner {
    pub cfg: MppiConfig,
    nominal: Vec<[f64; 4]>,
}

impl MppiPlanner {
    pub fn new(cfg: MppiConfig) -> Self {
        Self { nominal: vec![[0.0; 4]; cfg.horizon], cfg }
    }

    pub fn reset_plan(&mut self) {
        self.nominal = vec![[0.0; 4]; self.cfg.horizon];
    }

    /// Plan from a snapshot of the episode; returns the weighted-mean first
    /// action and shifts the nominal plan for the next call.
    pub fn plan(&mut self, episode: &Episode, rng: &mut ChaCha8Rng) -> Action {
        self.plan_detailed(episode, rng).action
    }

    pub fn plan_detailed(&mut self, episode: &Episode, rng: &mut ChaCha8Rng) -> MppiReport {
        let k = self.cfg.samples;
        let h = self.cfg.horizon;

        let mut report = MppiReport {
            action: Action::ZERO,
            returns: Vec::new(),
            weights: Vec::new(),
            sample_first_actions: Vec::new(),
        };

        for _ in 0..self.cfg.iterations.max(1) {
            // Sample all noise sequentially so parallel rollout order cannot
            // perturb randomness. Raw perturbed actions are kept in [-2, 2].
            let sequences: Vec<Vec<[f64; 4]>> = (0..k)
                .map(|_| {
                    (0..h)
                        .map(|t| {
                            let mut a = self.nominal[t];
                            for v in a.iter_mut() {
                                let noise: f64 = rng.sample(rand_distr::StandardNormal);
                                *v = (*v + noise * self.cfg.noise_sigma).clamp(-2.0, 2.0);
                            }
                            a
                        })
                        .collect()
                })
                .collect();

            let returns: Vec<f64> = sequences
                .par_iter()
                .map(|seq| {
                    let mut sim = episode.clone();
                    sim.cfg.render_depth = false;
                    if let Some(mu) = self.cfg.model_friction_override {
                        sim.env.scene.friction_mu = mu;
                    }
                    let mut total = 0.0;
                    for a in seq {
                        match sim.step(&Action(*a)) {
                            Ok(r) => {
                                total += r.reward.total;
                                if r.done {
                                    break;
                                }
                            }
                            Err(_) => break,
                        }
                    }
                    total
                })
                .collect();

            let best = returns.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let unnormalized: Vec<f64> = returns
                .iter()
                .map(|r| ((r - best) / self.cfg.temperature).exp())
                .collect();
            let total: f64 = unnormalized.iter().sum();
            let weights: Vec<f64> = unnormalized.iter().map(|w| w / total).collect();

            let mut plan = vec![[0.0_f64; 4]; h];
            for (seq, &w) in sequences.iter().zip(weights.iter()) {
                for (t, a) in seq.iter().enumerate() {
                    for c in 0..4 {
                        plan[t][c] += w * a[c];
                    }
                }
            }
            self.nominal = plan;

            report = MppiReport {
                action: Action(self.nominal[0]),
                returns,
                weights,
                sample_first_actions: sequences.iter().map(|s| Action(s[0])).collect(),
            };
        }

        // Shift for warm start.
        let first = Action(self.nominal[0]);
        self.nominal.rotate_left(1);
        if let Some(last) = self.nominal.last_mut() {
            *last = [0.0; 4];
        }
        let mut out = report;
        out.action = first;
        out
    }
}
