//! Time-stepped vehicle motion under velocity commands, contact detection,
//! and Coulomb-friction pushing of the object.
//!
//! The vehicle is a kinematic velocity-tracking model: body velocity follows
//! the command with a first-order lag, yaw integrates the lagged yaw rate,
//! and roll/pitch are set from the commanded horizontal acceleration
//! (capped) so the tilt observable exists. The arm is a capsule rigid to
//! the body, the collision cage a sphere, the object a yaw-aligned box
//! pushed by penalty contact with Coulomb friction against the table.

use crate::geometry::{rotation_from_euler, Rotation, Vec3};
use crate::scene::{SceneParams, VehicleGeometry};
use serde::{Deserialize, Serialize};

/// First-order velocity tracking time constant, seconds.
pub const VELOCITY_TAU: f64 = 0.3;
/// Kinematic tilt cap, radians.
pub const MAX_TILT: f64 = 0.3;
/// Penalty contact stiffness, N/m.
pub const CONTACT_STIFFNESS: f64 = 2000.0;
/// Speeds below this are treated as rest for the static/sliding switch.
pub const STICTION_EPS: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControlInput {
    /// Desired velocity, body frame, m/s.
    pub v_d: Vec3,
    /// Desired yaw rate, rad/s.
    pub yaw_rate_d: f64,
}

impl ControlInput {
    pub const HOVER: ControlInput = ControlInput { v_d: Vec3::new(0.0, 0.0, 0.0), yaw_rate_d: 0.0 };
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VehicleState {
    /// World position of the body origin.
    pub position: Vec3,
    #[serde(skip, default = "Rotation::identity")]
    pub orientation: Rotation,
    /// Body-frame velocity.
    pub velocity: Vec3,
    /// Body-frame angular velocity; roll/pitch rates are zero in this
    /// kinematic model.
    pub angular_velocity: Vec3,
    pub yaw: f64,
}

impl VehicleState {
    pub fn at_rest(position: Vec3, yaw: f64) -> Self {
        Self {
            position,
            orientation: rotation_from_euler(0.0, 0.0, yaw),
            velocity: Vec3::zeros(),
            angular_velocity: Vec3::zeros(),
            yaw,
        }
    }

    /// World position of the arm-frame origin `p_m`.
    pub fn arm_position(&self, geom: &VehicleGeometry) -> Vec3 {
        self.position + self.orientation * geom.arm_offset_body()
    }

    /// World direction of the arm axis (body x).
    pub fn arm_axis(&self) -> Vec3 {
        self.orientation * Vec3::new(1.0, 0.0, 0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectState {
    pub position: Vec3,
    pub yaw: f64,
    /// World-frame velocity.
    pub velocity: Vec3,
    pub yaw_rate: f64,
    pub on_table: bool,
}

impl ObjectState {
    pub fn resting(position: Vec3) -> Self {
        Self { position, yaw: 0.0, velocity: Vec3::zeros(), yaw_rate: 0.0, on_table: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Contact {
    /// World-frame contact point on the object surface.
    pub point: Vec3,
    /// Unit direction of the push force on the object (from the colliding
    /// body into the object).
    pub normal: Vec3,
    /// Interpenetration depth, meters, >= 0.
    pub penetration: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ContactReport {
    pub arm_object: Option<Contact>,
    pub cage_object: Option<Contact>,
    pub vehicle_env_collision: bool,
    pub object_on_table: bool,
}

/// One step of the kinematic velocity-tracking vehicle model.
pub fn vehicle_step(
    state: &VehicleState,
    u: &ControlInput,
    dt: f64,
    scene: &SceneParams,
) -> VehicleState {
    let alpha = dt / VELOCITY_TAU;
    let velocity = state.velocity + (u.v_d - state.velocity) * alpha;
    let yaw_rate = state.angular_velocity.z + (u.yaw_rate_d - state.angular_velocity.z) * alpha;
    let yaw = state.yaw + yaw_rate * dt;

    // Kinematic tilt from the commanded horizontal acceleration.
    let accel = (u.v_d - state.velocity) / VELOCITY_TAU;
    let a_h = (accel.x * accel.x + accel.y * accel.y).sqrt();
    let tilt = (a_h / scene.gravity).atan().min(MAX_TILT);
    let (roll, pitch) = if a_h > 1e-12 {
        let dir = accel.y.atan2(accel.x);
        (-tilt * dir.sin(), tilt * dir.cos())
    } else {
        (0.0, 0.0)
    };
    let orientation = rotation_from_euler(roll, pitch, yaw);

    // Translate in the yaw frame; the small kinematic tilt does not couple
    // into the velocity direction.
    let yaw_rot = rotation_from_euler(0.0, 0.0, yaw);
    let position = state.position + yaw_rot * velocity * dt;

    VehicleState {
        position,
        orientation,
        velocity,
        angular_velocity: Vec3::new(0.0, 0.0, yaw_rate),
        yaw,
    }
}

/// Signed distance from a point to a yaw-aligned box, box frame.
fn box_sdf(q: &Vec3, half: &Vec3) -> f64 {
    let dx = q.x.abs() - half.x;
    let dy = q.y.abs() - half.y;
    let dz = q.z.abs() - half.z;
    let outside = Vec3::new(dx.max(0.0), dy.max(0.0), dz.max(0.0));
    outside.norm() + dx.max(dy).max(dz).min(0.0)
}

/// Outward unit normal of the box at a (possibly interior) point, box frame.
fn box_outward_normal(q: &Vec3, half: &Vec3) -> Vec3 {
    let dx = q.x.abs() - half.x;
    let dy = q.y.abs() - half.y;
    let dz = q.z.abs() - half.z;
    if dx > 0.0 || dy > 0.0 || dz > 0.0 {
        let outside = Vec3::new(
            dx.max(0.0) * q.x.signum(),
            dy.max(0.0) * q.y.signum(),
            dz.max(0.0) * q.z.signum(),
        );
        let n = outside.norm();
        if n > 1e-12 {
            return outside / n;
        }
    }
    // Interior: minimal-penetration face axis.
    if dx >= dy && dx >= dz {
        Vec3::new(if q.x >= 0.0 { 1.0 } else { -1.0 }, 0.0, 0.0)
    } else if dy >= dz {
        Vec3::new(0.0, if q.y >= 0.0 { 1.0 } else { -1.0 }, 0.0)
    } else {
        Vec3::new(0.0, 0.0, if q.z >= 0.0 { 1.0 } else { -1.0 })
    }
}

struct YawBox {
    center: Vec3,
    half: Vec3,
    yaw: f64,
}

impl YawBox {
    fn to_box_frame(&self, p: &Vec3) -> Vec3 {
        let d = p - self.center;
        let (s, c) = (-self.yaw).sin_cos();
        Vec3::new(c * d.x - s * d.y, s * d.x + c * d.y, d.z)
    }

    fn to_world_dir(&self, v: &Vec3) -> Vec3 {
        let (s, c) = self.yaw.sin_cos();
        Vec3::new(c * v.x - s * v.y, s * v.x + c * v.y, v.z)
    }
}

fn object_box(object: &ObjectState, scene: &SceneParams) -> YawBox {
    let h = scene.object_edge / 2.0;
    YawBox { center: object.position, half: Vec3::new(h, h, h), yaw: object.yaw }
}

/// Closest approach of a segment to a yaw box, via ternary search on the
/// convex point-to-box signed distance along the segment.
fn segment_box_contact(p0: &Vec3, p1: &Vec3, radius: f64, bx: &YawBox) -> Option<Contact> {
    let sdf_at = |t: f64| {
        let p = p0 + (p1 - p0) * t;
        box_sdf(&bx.to_box_frame(&p), &bx.half)
    };
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    for _ in 0..100 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if sdf_at(m1) <= sdf_at(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    let t = (lo + hi) / 2.0;
    let closest = p0 + (p1 - p0) * t;
    sphere_box_contact(&closest, radius, bx)
}

fn sphere_box_contact(center: &Vec3, radius: f64, bx: &YawBox) -> Option<Contact> {
    let q = bx.to_box_frame(center);
    let sdf = box_sdf(&q, &bx.half);
    if sdf >= radius {
        return None;
    }
    let outward_local = box_outward_normal(&q, &bx.half);
    let outward = bx.to_world_dir(&outward_local);
    Some(Contact {
        point: center - outward * sdf.max(0.0),
        // Push force on the object acts opposite the outward box normal.
        normal: -outward,
        penetration: radius - sdf,
    })
}

/// Contact state between vehicle (arm capsule + cage sphere), object, table
/// and room.
pub fn contact_query(
    vehicle: &VehicleState,
    geom: &VehicleGeometry,
    object: &ObjectState,
    scene: &SceneParams,
) -> ContactReport {
    let obj_box = object_box(object, scene);

    let arm_center = vehicle.arm_position(geom);
    let axis = vehicle.arm_axis();
    let half_len = geom.arm_exposed_length / 2.0;
    let p0 = arm_center - axis * half_len;
    let p1 = arm_center + axis * half_len;
    let arm_object = segment_box_contact(&p0, &p1, geom.arm_radius, &obj_box);

    let cage_object = sphere_box_contact(&vehicle.position, geom.body_radius, &obj_box);

    let table = YawBox {
        center: scene.table_center(),
        half: Vec3::new(scene.table_size_x / 2.0, scene.table_size_y / 2.0, scene.table_height / 2.0),
        yaw: 0.0,
    };
    let p = vehicle.position;
    let r = geom.body_radius;
    let h = scene.room_half_extent;
    let room_hit = p.z - r < 0.0
        || p.z + r > 2.0 * h
        || p.x.abs() + r > h
        || p.y.abs() + r > h;
    // Center-point test: the cage legitimately overhangs the table while
    // pushing at arm height, so only a center inside the slab counts.
    let table_hit = box_sdf(&table.to_box_frame(&p), &table.half) < 0.0;

    let footprint = (object.position.x - scene.table_center_x).abs() <= scene.table_size_x / 2.0
        && (object.position.y - scene.table_center_y).abs() <= scene.table_size_y / 2.0;

    ContactReport {
        arm_object,
        cage_object,
        vehicle_env_collision: room_hit || table_hit,
        object_on_table: object.on_table && footprint,
    }
}

/// Advance the pushed object one step under penalty contact forces and
/// Coulomb friction against the table.
pub fn object_step(
    object: &ObjectState,
    contact: &ContactReport,
    scene: &SceneParams,
    dt: f64,
) -> ObjectState {
    let mut next = object.clone();

    if !object.on_table {
        // Ballistic fall after leaving the table.
        next.velocity.z -= scene.gravity * dt;
        next.position += next.velocity * dt;
        let floor = scene.object_edge / 2.0;
        if next.position.z <= floor {
            next.position.z = floor;
            next.velocity = Vec3::zeros();
            next.yaw_rate = 0.0;
        }
        return next;
    }

    // Planar push force and vertical-axis torque from penalty contacts.
    let mut force = nalgebra::Vector2::new(0.0, 0.0);
    let mut torque_z = 0.0;
    for c in [contact.arm_object.as_ref(), contact.cage_object.as_ref()].into_iter().flatten() {
        let f = nalgebra::Vector2::new(c.normal.x, c.normal.y) * CONTACT_STIFFNESS * c.penetration;
        let r = c.point - object.position;
        torque_z += r.x * f.y - r.y * f.x;
        force += f;
    }

    let m = scene.object_mass;
    let friction_limit = scene.friction_mu * m * scene.gravity;
    let v = nalgebra::Vector2::new(object.velocity.x, object.velocity.y);
    let speed = v.norm();

    let v_new = if speed < STICTION_EPS {
        let f_mag = force.norm();
        if f_mag <= friction_limit {
            nalgebra::Vector2::zeros()
        } else {
            let dir = force / f_mag;
            dir * ((f_mag - friction_limit) / m * dt)
        }
    } else {
        let accel = (force - v / speed * friction_limit) / m;
        let candidate = v + accel * dt;
        if candidate.dot(&v) <= 0.0 {
            // Friction stopped (or would reverse) the slide within the step.
            let f_mag = force.norm();
            if f_mag <= friction_limit {
                nalgebra::Vector2::zeros()
            } else {
                let dir = force / f_mag;
                dir * ((f_mag - friction_limit) / m * dt)
            }
        } else {
            candidate
        }
    };

    // Trapezoidal position update keeps the discrete stopping distance on
    // the analytic Coulomb law.
    let displacement = (v + v_new) * 0.5 * dt;
    next.position.x += displacement.x;
    next.position.y += displacement.y;
    next.velocity = Vec3::new(v_new.x, v_new.y, 0.0);

    // Yaw from contact torque, with a torsional Coulomb bound using an
    // effective lever of a third of the edge.
    let inertia_z = m * scene.object_edge * scene.object_edge / 6.0;
    let torque_limit = friction_limit * scene.object_edge / 3.0;
    let w = object.yaw_rate;
    let w_new = if w.abs() < STICTION_EPS {
        if torque_z.abs() <= torque_limit {
            0.0
        } else {
            (torque_z - torque_limit * torque_z.signum()) / inertia_z * dt
        }
    } else {
        let candidate = w + (torque_z - torque_limit * w.signum()) / inertia_z * dt;
        if candidate * w <= 0.0 {
            0.0
        } else {
            candidate
        }
    };
    next.yaw += (w + w_new) * 0.5 * dt;
    next.yaw_rate = w_new;

    // Leaving the table footprint starts the fall.
    let footprint = (next.position.x - scene.table_center_x).abs() <= scene.table_size_x / 2.0
        && (next.position.y - scene.table_center_y).abs() <= scene.table_size_y / 2.0;
    if !footprint {
        next.on_table = false;
    } else {
        next.position.z = scene.object_rest_z();
    }
    next
}

/// Full environment state for one simulated scene.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvState {
    pub vehicle: VehicleState,
    pub object: ObjectState,
    pub scene: SceneParams,
    pub geom: VehicleGeometry,
}

/// Internal physics substep; the penalty contact is only stable well below
/// the control period.
pub const PHYSICS_SUBSTEP: f64 = 0.01;

fn deeper(a: &Option<Contact>, b: &Option<Contact>) -> bool {
    match (a, b) {
        (Some(x), Some(y)) => x.penetration > y.penetration,
        (Some(_), None) => true,
        _ => false,
    }
}

/// One full control step: vehicle, then contact, then object, substepped at
/// `PHYSICS_SUBSTEP`. The returned report aggregates the substeps: any
/// environment collision counts, object contacts carry their deepest
/// penetration, table status is final.
pub fn env_step(env: &mut EnvState, u: &ControlInput, dt: f64) -> ContactReport {
    let n = ((dt / PHYSICS_SUBSTEP).ceil() as usize).max(1);
    let h = dt / n as f64;
    let mut report = ContactReport::default();
    for _ in 0..n {
        env.vehicle = vehicle_step(&env.vehicle, u, h, &env.scene);
        let c = contact_query(&env.vehicle, &env.geom, &env.object, &env.scene);
        env.object = object_step(&env.object, &c, &env.scene, h);
        report.vehicle_env_collision |= c.vehicle_env_collision;
        report.object_on_table = c.object_on_table;
        if deeper(&c.arm_object, &report.arm_object) {
            report.arm_object = c.arm_object;
        }
        if deeper(&c.cage_object, &report.cage_object) {
            report.cage_object = c.cage_object;
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::tilt_metric;
    use approx::assert_relative_eq;

    fn scene() -> SceneParams {
        SceneParams::default()
    }

    #[test]
    fn hover_is_equilibrium() {
        let s0 = VehicleState::at_rest(Vec3::new(0.0, 0.0, 1.0), 0.0);
        let s1 = vehicle_step(&s0, &ControlInput::HOVER, 0.1, &scene());
        assert_relative_eq!(s1.position, s0.position, epsilon = 1e-12);
        assert_eq!(s1.velocity, Vec3::zeros());
        assert_eq!(tilt_metric(&s1.orientation), 0.0);
    }

    #[test]
    fn one_step_closes_a_third_of_the_gap() {
        let s0 = VehicleState::at_rest(Vec3::zeros(), 0.0);
        let u = ControlInput { v_d: Vec3::new(1.0, 0.0, 0.0), yaw_rate_d: 0.0 };
        let s1 = vehicle_step(&s0, &u, 0.1, &scene());
        assert_relative_eq!(s1.velocity.x, 1.0 / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn step_response_converges_within_one_percent() {
        let mut s = VehicleState::at_rest(Vec3::zeros(), 0.0);
        let u = ControlInput { v_d: Vec3::new(1.0, 0.0, 0.0), yaw_rate_d: 0.0 };
        for _ in 0..30 {
            s = vehicle_step(&s, &u, 0.1, &scene());
        }
        assert!((s.velocity.x - 1.0).abs() < 0.01);
    }

    #[test]
    fn tilt_never_exceeds_cap() {
        let mut s = VehicleState::at_rest(Vec3::zeros(), 0.0);
        let cap = 1.0 - MAX_TILT.cos();
        for k in 0..200 {
            let u = ControlInput {
                v_d: Vec3::new(((k * 7) % 3) as f64 - 1.0, ((k * 5) % 3) as f64 - 1.0, 0.0),
                yaw_rate_d: 0.5,
            };
            s = vehicle_step(&s, &u, 0.1, &scene());
            assert!(tilt_metric(&s.orientation) <= cap + 1e-12);
        }
    }

    #[test]
    fn far_arm_has_no_contact() {
        let sc = scene();
        let v = VehicleState::at_rest(Vec3::new(-2.0, 0.0, sc.object_rest_z()), 0.0);
        let o = ObjectState::resting(Vec3::new(0.0, 0.0, sc.object_rest_z()));
        let report = contact_query(&v, &VehicleGeometry::default(), &o, &sc);
        assert!(report.arm_object.is_none());
        assert!(report.cage_object.is_none());
    }

    #[test]
    fn arm_through_object_center_reports_face_normal() {
        let sc = scene();
        let geom = VehicleGeometry::default();
        let z = sc.object_rest_z();
        let o = ObjectState::resting(Vec3::new(0.0, 0.0, z));
        // Place the vehicle so the arm midpoint sits at the object center.
        let v = VehicleState::at_rest(Vec3::new(-geom.arm_offset_x, 0.0, z), 0.0);
        let report = contact_query(&v, &geom, &o, &sc);
        let c = report.arm_object.expect("expected contact");
        assert!(c.penetration > 0.0);
        // Normal must be a face axis.
        let n = c.normal;
        let axis_count =
            [n.x, n.y, n.z].iter().filter(|v| (v.abs() - 1.0).abs() < 1e-6).count();
        assert_eq!(axis_count, 1, "normal {n:?} is not a face axis");

        // Oracle: densely sample the capsule axis; the minimal box SDF must
        // match the reported penetration.
        let bx = object_box(&o, &sc);
        let arm = v.arm_position(&geom);
        let axis = v.arm_axis();
        let half_len = geom.arm_exposed_length / 2.0;
        let mut best = f64::INFINITY;
        for i in 0..=10_000 {
            let t = i as f64 / 10_000.0 * 2.0 - 1.0;
            let p = arm + axis * (t * half_len);
            best = best.min(box_sdf(&bx.to_box_frame(&p), &bx.half));
        }
        assert!((c.penetration - (geom.arm_radius - best)).abs() < 1e-6);
    }

    #[test]
    fn capsule_contact_matches_dense_sampling_oracle_offset_case() {
        let sc = scene();
        let geom = VehicleGeometry::default();
        let z = sc.object_rest_z();
        let mut o = ObjectState::resting(Vec3::new(0.2, 0.07, z));
        o.yaw = 0.4;
        let v = VehicleState::at_rest(Vec3::new(-0.2, 0.0, z + 0.02), 0.3);
        let report = contact_query(&v, &geom, &o, &sc);

        let bx = object_box(&o, &sc);
        let arm = v.arm_position(&geom);
        let axis = v.arm_axis();
        let half_len = geom.arm_exposed_length / 2.0;
        let mut best = f64::INFINITY;
        for i in 0..=20_000 {
            let t = i as f64 / 20_000.0 * 2.0 - 1.0;
            let p = arm + axis * (t * half_len);
            best = best.min(box_sdf(&bx.to_box_frame(&p), &bx.half));
        }
        match report.arm_object {
            Some(c) => assert!((c.penetration - (geom.arm_radius - best)).abs() < 1e-6),
            None => assert!(best >= geom.arm_radius - 1e-9),
        }
    }

    #[test]
    fn vehicle_inside_table_collides() {
        let sc = scene();
        let v = VehicleState::at_rest(Vec3::new(0.0, 0.0, 0.3), 0.0);
        let o = ObjectState::resting(Vec3::new(0.3, 0.3, sc.object_rest_z()));
        let report = contact_query(&v, &VehicleGeometry::default(), &o, &sc);
        assert!(report.vehicle_env_collision);
    }

    #[test]
    fn vehicle_outside_room_collides() {
        let sc = scene();
        let v = VehicleState::at_rest(Vec3::new(2.4, 0.0, 1.0), 0.0);
        let o = ObjectState::resting(Vec3::new(0.0, 0.0, sc.object_rest_z()));
        let report = contact_query(&v, &VehicleGeometry::default(), &o, &sc);
        assert!(report.vehicle_env_collision);
    }

    #[test]
    fn resting_object_unchanged_without_contact() {
        let sc = scene();
        let o = ObjectState::resting(Vec3::new(0.0, 0.0, sc.object_rest_z()));
        let report = ContactReport { object_on_table: true, ..Default::default() };
        let next = object_step(&o, &report, &sc, 0.1);
        assert_eq!(next, o);
    }

    #[test]
    fn stopping_distance_matches_coulomb_law() {
        for mu in [0.2, 0.4, 0.6] {
            let mut sc = scene();
            sc.friction_mu = mu;
            let start = Vec3::new(-0.2, 0.0, sc.object_rest_z());
            let mut o = ObjectState::resting(start);
            o.velocity = Vec3::new(0.5, 0.0, 0.0);
            let report = ContactReport { object_on_table: true, ..Default::default() };
            let dt = 0.01;
            for _ in 0..1000 {
                o = object_step(&o, &report, &sc, dt);
                if o.velocity.norm() == 0.0 {
                    break;
                }
            }
            let travelled = (o.position - start).norm();
            let analytic = 0.5 * 0.5 / (2.0 * mu * sc.gravity);
            assert!(
                (travelled - analytic).abs() / analytic < 0.05,
                "mu={mu}: {travelled} vs {analytic}"
            );
        }
    }

    #[test]
    fn static_friction_holds_exactly_below_threshold() {
        let sc = scene();
        let o = ObjectState::resting(Vec3::new(0.0, 0.0, sc.object_rest_z()));
        let limit = sc.friction_mu * sc.object_mass * sc.gravity;
        let sub_threshold = limit * 0.99 / CONTACT_STIFFNESS;
        let report = ContactReport {
            arm_object: Some(Contact {
                point: o.position - Vec3::new(sc.object_edge / 2.0, 0.0, 0.0),
                normal: Vec3::new(1.0, 0.0, 0.0),
                penetration: sub_threshold,
            }),
            object_on_table: true,
            ..Default::default()
        };
        let mut state = o.clone();
        for _ in 0..100 {
            state = object_step(&state, &report, &sc, 0.1);
        }
        assert_eq!(state.position, o.position);
        assert_eq!(state.velocity, Vec3::zeros());
    }

    #[test]
    fn push_past_threshold_accelerates_by_force_balance() {
        let mut sc = scene();
        sc.friction_mu = 0.4;
        let o = ObjectState::resting(Vec3::new(0.0, 0.0, sc.object_rest_z()));
        // 3 N push through the center.
        let report = ContactReport {
            arm_object: Some(Contact {
                point: o.position,
                normal: Vec3::new(1.0, 0.0, 0.0),
                penetration: 3.0 / CONTACT_STIFFNESS,
            }),
            object_on_table: true,
            ..Default::default()
        };
        let dt = 1e-4;
        let next = object_step(&o, &report, &sc, dt);
        let accel = next.velocity.x / dt;
        let expected = (3.0 - 0.4 * 0.5 * 9.81) / 0.5;
        assert_relative_eq!(accel, expected, epsilon = 1e-9);
    }

    #[test]
    fn free_sliding_dissipates_mu_m_g_per_meter() {
        let sc = scene();
        let mut o = ObjectState::resting(Vec3::new(-0.3, 0.0, sc.object_rest_z()));
        o.velocity = Vec3::new(0.6, 0.1, 0.0);
        let report = ContactReport { object_on_table: true, ..Default::default() };
        let mut prev = o.clone();
        for _ in 0..200 {
            let next = object_step(&prev, &report, &sc, 0.01);
            let speed_prev = prev.velocity.norm();
            let speed_next = next.velocity.norm();
            assert!(speed_next <= speed_prev + 1e-12, "speed increased while free sliding");
            if speed_next > 0.0 {
                let ke_drop = 0.5 * sc.object_mass * (speed_prev.powi(2) - speed_next.powi(2));
                let dist = (next.position - prev.position).norm();
                let expected = sc.friction_mu * sc.object_mass * sc.gravity * dist;
                assert!((ke_drop - expected).abs() / expected < 0.02);
            }
            prev = next;
            if prev.velocity.norm() == 0.0 {
                break;
            }
        }
    }

    #[test]
    fn object_falls_after_leaving_footprint() {
        let sc = scene();
        let mut o = ObjectState::resting(Vec3::new(sc.table_size_x / 2.0 - 0.001, 0.0, sc.object_rest_z()));
        o.velocity = Vec3::new(1.0, 0.0, 0.0);
        let report = ContactReport { object_on_table: true, ..Default::default() };
        o = object_step(&o, &report, &sc, 0.1);
        assert!(!o.on_table);
        for _ in 0..50 {
            o = object_step(&o, &report, &sc, 0.1);
        }
        assert_relative_eq!(o.position.z, sc.object_edge / 2.0, epsilon = 1e-9);
    }

    fn default_env() -> EnvState {
        let sc = scene();
        let z = sc.object_rest_z();
        EnvState {
            vehicle: VehicleState::at_rest(Vec3::new(-1.0, 0.0, z), 0.0),
            object: ObjectState::resting(Vec3::new(0.0, 0.0, z)),
            scene: sc,
            geom: VehicleGeometry::default(),
        }
    }

    #[test]
    fn zero_action_leaves_object_at_rest() {
        let mut env = default_env();
        let start = env.object.position;
        for _ in 0..10 {
            env_step(&mut env, &ControlInput::HOVER, 0.1);
        }
        assert_relative_eq!(env.object.position, start, epsilon = 1e-9);
    }

    #[test]
    fn env_step_is_deterministic() {
        let mut a = default_env();
        let mut b = default_env();
        let u = ControlInput { v_d: Vec3::new(0.7, 0.1, 0.0), yaw_rate_d: 0.1 };
        for _ in 0..100 {
            env_step(&mut a, &u, 0.1);
            env_step(&mut b, &u, 0.1);
        }
        assert_eq!(a, b);
    }

    #[test]
    fn lower_friction_yields_larger_displacement() {
        let displacement = |mu: f64| {
            let mut env = default_env();
            env.scene.friction_mu = mu;
            let u = ControlInput { v_d: Vec3::new(0.5, 0.0, 0.0), yaw_rate_d: 0.0 };
            let start = env.object.position;
            for _ in 0..40 {
                env_step(&mut env, &u, 0.1);
            }
            (env.object.position - start).norm()
        };
        let low = displacement(0.05);
        let high = displacement(0.8);
        assert!(low > high, "low-mu displacement {low} not larger than {high}");
    }

    #[test]
    fn descending_into_table_collides() {
        let mut env = default_env();
        env.vehicle = VehicleState::at_rest(Vec3::new(0.3, 0.3, 1.5), 0.0);
        let u = ControlInput { v_d: Vec3::new(0.0, 0.0, -0.5), yaw_rate_d: 0.0 };
        let mut collided = false;
        for _ in 0..100 {
            if env_step(&mut env, &u, 0.1).vehicle_env_collision {
                collided = true;
                break;
            }
        }
        assert!(collided);
    }
}
