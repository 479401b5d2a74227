//! State-vector assembly and the synthetic depth camera.
//!
//! The depth image is ray-cast against analytic primitives: the room
//! interior (an inverted box), the table box and the object box. Pixels are
//! row-major with the origin at the top-left; values are Euclidean hit
//! distances clamped to [near, far], with misses mapped to far. The
//! vehicle's own geometry is not rendered.

use crate::dynamics::{EnvState, ObjectState};
use crate::geometry::Vec3;
use crate::reward::{compute_distances, DistanceSet};
use crate::scene::{GoalSpec, SceneParams};
use serde::{Deserialize, Serialize};
use std::io::Write;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CameraModel {
    pub width: usize,
    pub height: usize,
    /// Horizontal field of view, radians.
    pub horizontal_fov: f64,
    pub near: f64,
    pub far: f64,
    /// Camera position in the body frame; the camera looks along body +x.
    pub offset_x: f64,
    pub offset_y: f64,
    pub offset_z: f64,
}

impl Default for CameraModel {
    fn default() -> Self {
        Self {
            width: 64,
            height: 64,
            horizontal_fov: std::f64::consts::FRAC_PI_2,
            near: 0.1,
            far: 5.0,
            offset_x: 0.0,
            offset_y: 0.0,
            offset_z: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DepthImage {
    pub width: usize,
    pub height: usize,
    pub near: f32,
    pub far: f32,
    /// Row-major, top-left origin.
    pub data: Vec<f32>,
}

impl DepthImage {
    /// Text header line followed by the raw little-endian f32 payload.
    pub fn write_binary<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "{} {} {} {}", self.width, self.height, self.near, self.far)?;
        for v in &self.data {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }
}

/// The scalar state vector plus the optional depth image.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub roll: f64,
    pub pitch: f64,
    /// Body-frame velocity.
    pub velocity: [f64; 3],
    /// Body-frame angular velocity.
    pub angular_velocity: [f64; 3],
    /// Arm-to-object distance, m.
    pub d_mo: f64,
    /// Arm-to-object unit direction in the arm frame; zero when coincident.
    pub u_mo: [f64; 3],
    pub d_og_xy: f64,
    pub delta_d_og_xy: f64,
    /// Planar arm-to-goal unit direction in the arm frame; zero when the
    /// goal sits directly above or below the arm.
    pub u_mg_xy: [f64; 2],
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub depth: Option<DepthImage>,
}

impl Observation {
    /// Flat scalar encoding used by the wire protocol:
    /// [roll, pitch, v(3), omega(3), d_mo, u_mo(3), d_og_xy, delta, u_mg_xy(2)].
    pub fn scalar_vector(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(16);
        out.push(self.roll);
        out.push(self.pitch);
        out.extend_from_slice(&self.velocity);
        out.extend_from_slice(&self.angular_velocity);
        out.push(self.d_mo);
        out.extend_from_slice(&self.u_mo);
        out.push(self.d_og_xy);
        out.push(self.delta_d_og_xy);
        out.extend_from_slice(&self.u_mg_xy);
        out
    }

    /// Inverse of `scalar_vector`; used by wire-protocol clients.
    pub fn from_scalar_vector(v: &[f64]) -> Option<Observation> {
        if v.len() != 16 {
            return None;
        }
        Some(Observation {
            roll: v[0],
            pitch: v[1],
            velocity: [v[2], v[3], v[4]],
            angular_velocity: [v[5], v[6], v[7]],
            d_mo: v[8],
            u_mo: [v[9], v[10], v[11]],
            d_og_xy: v[12],
            delta_d_og_xy: v[13],
            u_mg_xy: [v[14], v[15]],
            depth: None,
        })
    }
}

/// Assemble the observation for the current step. Distances come from the
/// same `DistanceSet` the reward uses.
pub fn assemble_observation(
    env: &EnvState,
    goal: &GoalSpec,
    dist: &DistanceSet,
    camera: &CameraModel,
    render: bool,
) -> Observation {
    let vehicle = &env.vehicle;
    let (roll, pitch, _yaw) = vehicle.orientation.euler_angles();
    let arm = vehicle.arm_position(&env.geom);
    let inv = vehicle.orientation.inverse();

    let to_object = inv * (env.object.position - arm);
    let d_mo = to_object.norm();
    let u_mo = if d_mo < 1e-9 { Vec3::zeros() } else { to_object / d_mo };

    let to_goal = inv * (goal.position() - arm);
    let planar = (to_goal.x * to_goal.x + to_goal.y * to_goal.y).sqrt();
    let u_mg_xy =
        if planar < 1e-9 { [0.0, 0.0] } else { [to_goal.x / planar, to_goal.y / planar] };

    let depth = if render { Some(render_depth(env, camera)) } else { None };

    Observation {
        roll,
        pitch,
        velocity: [vehicle.velocity.x, vehicle.velocity.y, vehicle.velocity.z],
        angular_velocity: [
            vehicle.angular_velocity.x,
            vehicle.angular_velocity.y,
            vehicle.angular_velocity.z,
        ],
        d_mo,
        u_mo: [u_mo.x, u_mo.y, u_mo.z],
        d_og_xy: dist.d_og_xy,
        delta_d_og_xy: dist.delta_d_og_xy,
        u_mg_xy,
        depth,
    }
}

/// Convenience wrapper computing the distances as well.
pub fn observe(
    env: &EnvState,
    goal: &GoalSpec,
    prev_d_og_xy: f64,
    camera: &CameraModel,
    render: bool,
) -> Observation {
    let dist = compute_distances(&env.vehicle, &env.geom, &env.object, goal, prev_d_og_xy);
    assemble_observation(env, goal, &dist, camera, render)
}

/// Slab intersection of a ray with a box in the box's own frame. Returns
/// (t_entry, t_exit) when the intervals overlap.
fn ray_box(origin: &Vec3, dir: &Vec3, half: &Vec3) -> Option<(f64, f64)> {
    let mut t_near = f64::NEG_INFINITY;
    let mut t_far = f64::INFINITY;
    for axis in 0..3 {
        let o = origin[axis];
        let d = dir[axis];
        let h = half[axis];
        if d.abs() < 1e-12 {
            if o.abs() > h {
                return None;
            }
        } else {
            let t1 = (-h - o) / d;
            let t2 = (h - o) / d;
            let (lo, hi) = if t1 < t2 { (t1, t2) } else { (t2, t1) };
            t_near = t_near.max(lo);
            t_far = t_far.min(hi);
            if t_near > t_far {
                return None;
            }
        }
    }
    Some((t_near, t_far))
}

fn yawed_ray_box(
    origin: &Vec3,
    dir: &Vec3,
    center: &Vec3,
    half: &Vec3,
    yaw: f64,
) -> Option<(f64, f64)> {
    let (s, c) = (-yaw).sin_cos();
    let rot = |v: &Vec3| Vec3::new(c * v.x - s * v.y, s * v.x + c * v.y, v.z);
    let o = rot(&(origin - center));
    let d = rot(dir);
    ray_box(&o, &d, half)
}

fn cast_ray(origin: &Vec3, dir: &Vec3, scene: &SceneParams, object: &ObjectState) -> Option<f64> {
    let mut best: Option<f64> = None;
    let mut consider = |t: f64| {
        if t > 1e-9 && best.map_or(true, |b| t < b) {
            best = Some(t);
        }
    };

    // Room interior: exit distance of the inverted box.
    let h = scene.room_half_extent;
    let room_center = Vec3::new(0.0, 0.0, h);
    if let Some((_, t_exit)) =
        ray_box(&(origin - room_center), dir, &Vec3::new(h, h, h))
    {
        consider(t_exit);
    }

    let table_half =
        Vec3::new(scene.table_size_x / 2.0, scene.table_size_y / 2.0, scene.table_height / 2.0);
    if let Some((t_entry, _)) =
        yawed_ray_box(origin, dir, &scene.table_center(), &table_half, 0.0)
    {
        consider(t_entry);
    }

    let oh = scene.object_edge / 2.0;
    if let Some((t_entry, _)) =
        yawed_ray_box(origin, dir, &object.position, &Vec3::new(oh, oh, oh), object.yaw)
    {
        consider(t_entry);
    }

    best
}

/// Pinhole ray-cast depth render from the vehicle's camera.
pub fn render_depth(env: &EnvState, camera: &CameraModel) -> DepthImage {
    let vehicle = &env.vehicle;
    let origin = vehicle.position
        + vehicle.orientation * Vec3::new(camera.offset_x, camera.offset_y, camera.offset_z);
    // Camera basis in body coordinates: forward +x, image-right -y,
    // image-down -z.
    let forward = vehicle.orientation * Vec3::new(1.0, 0.0, 0.0);
    let right = vehicle.orientation * Vec3::new(0.0, -1.0, 0.0);
    let down = vehicle.orientation * Vec3::new(0.0, 0.0, -1.0);

    let tan_h = (camera.horizontal_fov / 2.0).tan();
    let tan_v = tan_h * camera.height as f64 / camera.width as f64;

    let mut data = Vec::with_capacity(camera.width * camera.height);
    for i in 0..camera.height {
        let v = ((i as f64 + 0.5) / camera.height as f64) * 2.0 - 1.0;
        for j in 0..camera.width {
            let u = ((j as f64 + 0.5) / camera.width as f64) * 2.0 - 1.0;
            let dir = (forward + right * (u * tan_h) + down * (v * tan_v)).normalize();
            let depth = cast_ray(&origin, &dir, &env.scene, &env.object)
                .unwrap_or(camera.far)
                .clamp(camera.near, camera.far);
            data.push(depth as f32);
        }
    }
    DepthImage {
        width: camera.width,
        height: camera.height,
        near: camera.near as f32,
        far: camera.far as f32,
        data,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{ObjectState, VehicleState};
    use crate::scene::VehicleGeometry;
    use approx::assert_relative_eq;
    use std::f64::consts::FRAC_PI_2;

    fn env_at(vehicle_pos: Vec3, yaw: f64, object_pos: Vec3) -> EnvState {
        EnvState {
            vehicle: VehicleState::at_rest(vehicle_pos, yaw),
            object: ObjectState::resting(object_pos),
            scene: SceneParams::default(),
            geom: VehicleGeometry::default(),
        }
    }

    #[test]
    fn object_dead_ahead_of_arm() {
        let scene = SceneParams::default();
        let z = scene.object_rest_z();
        let geom = VehicleGeometry::default();
        let env = env_at(Vec3::new(-1.0 - geom.arm_offset_x, 0.0, z), 0.0, Vec3::new(0.0, 0.0, z));
        let goal = GoalSpec::new(Vec3::new(0.25, 0.0, z));
        let obs = observe(&env, &goal, 0.25, &CameraModel::default(), false);
        assert_relative_eq!(obs.d_mo, 1.0, epsilon = 1e-12);
        assert_relative_eq!(obs.u_mo[0], 1.0, epsilon = 1e-12);
        assert_relative_eq!(obs.u_mo[1], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn yawed_vehicle_rotates_object_direction_into_arm_frame() {
        let scene = SceneParams::default();
        let z = scene.object_rest_z();
        let geom = VehicleGeometry::default();
        // Vehicle yawed +90 deg so its arm points along world +y; object due
        // north (world +y) of the arm appears dead ahead in the arm frame.
        let vehicle_pos = Vec3::new(0.0, -1.0 - geom.arm_offset_x, z);
        let env = env_at(vehicle_pos, FRAC_PI_2, Vec3::new(0.0, 0.0, z));
        let goal = GoalSpec::new(Vec3::new(0.25, 0.0, z));
        let obs = observe(&env, &goal, 0.25, &CameraModel::default(), false);
        assert_relative_eq!(obs.u_mo[0], 1.0, epsilon = 1e-9);
        assert_relative_eq!(obs.u_mo[1], 0.0, epsilon = 1e-9);
    }

    #[test]
    fn goal_directly_below_arm_gives_zero_planar_unit() {
        let scene = SceneParams::default();
        let z = scene.object_rest_z();
        let geom = VehicleGeometry::default();
        let env = env_at(Vec3::new(-geom.arm_offset_x, 0.0, z + 1.0), 0.0, Vec3::new(0.3, 0.0, z));
        let goal = GoalSpec::new(Vec3::new(0.0, 0.0, z));
        let obs = observe(&env, &goal, 0.3, &CameraModel::default(), false);
        assert_eq!(obs.u_mg_xy, [0.0, 0.0]);
    }

    #[test]
    fn unit_vector_norms_on_random_states() {
        use rand::Rng;
        let mut rng = crate::rng::env_stream(5, 0);
        let scene = SceneParams::default();
        let z = scene.object_rest_z();
        for _ in 0..1000 {
            let env = env_at(
                Vec3::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(0.2..2.0)),
                rng.gen_range(-3.0..3.0),
                Vec3::new(rng.gen_range(-0.35..0.35), rng.gen_range(-0.35..0.35), z),
            );
            let goal = GoalSpec::new(Vec3::new(rng.gen_range(-0.35..0.35), rng.gen_range(-0.35..0.35), z));
            let obs = observe(&env, &goal, 0.0, &CameraModel::default(), false);
            let n_mo = (obs.u_mo[0].powi(2) + obs.u_mo[1].powi(2) + obs.u_mo[2].powi(2)).sqrt();
            let n_mg = (obs.u_mg_xy[0].powi(2) + obs.u_mg_xy[1].powi(2)).sqrt();
            assert!(n_mo < 1e-6 || (n_mo - 1.0).abs() < 1e-6);
            assert!(n_mg < 1e-6 || (n_mg - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn wall_distance_is_analytic() {
        // Camera 2 m from the +x room wall, axis perpendicular to it.
        let scene = SceneParams::default();
        let env = env_at(
            Vec3::new(scene.room_half_extent - 2.0, 0.0, 2.0),
            0.0,
            Vec3::new(-0.3, 0.3, scene.object_rest_z()),
        );
        let img = render_depth(&env, &CameraModel::default());
        // 64x64: the four central pixels straddle the axis; check one and
        // allow the half-pixel obliquity.
        let center = img.data[31 * 64 + 31] as f64;
        let u: f64 = (31.0 + 0.5) / 64.0 * 2.0 - 1.0;
        let expected = 2.0 * (1.0 + 2.0 * u * u).sqrt();
        assert!((center - expected).abs() < 1e-6, "{center} vs {expected}");
    }

    #[test]
    fn open_space_clamps_to_far() {
        let camera = CameraModel { far: 1.0, width: 8, height: 8, ..Default::default() };
        let scene = SceneParams::default();
        // Looking at the far wall from > far plane away.
        let env =
            env_at(Vec3::new(-2.0, 0.0, 2.0), 0.0, Vec3::new(0.0, 0.0, scene.object_rest_z()));
        let img = render_depth(&env, &camera);
        assert!(img.data.iter().all(|&d| d == 1.0));
    }

    #[test]
    fn depth_is_translation_consistent() {
        let scene = SceneParams::default();
        let mut camera = CameraModel::default();
        camera.width = 65; // odd so a pixel ray lies exactly on the axis
        camera.height = 65;
        let obj = Vec3::new(-0.3, 0.3, scene.object_rest_z());
        let near = render_depth(&env_at(Vec3::new(0.5, 0.0, 2.0), 0.0, obj), &camera);
        let far = render_depth(&env_at(Vec3::new(0.0, 0.0, 2.0), 0.0, obj), &camera);
        let c = (65 / 2) * 65 + 65 / 2;
        assert!((far.data[c] - near.data[c] - 0.5).abs() < 1e-6);
    }

    #[test]
    fn object_footprint_matches_projection_oracle() {
        // A 0.1 m cube 1 m ahead: compare the rendered pixel span on the
        // center row against the analytic pinhole projection of the facing
        // face's corners.
        let z = 2.0;
        let camera = CameraModel { width: 129, height: 129, ..Default::default() };
        let env = env_at(Vec3::new(-1.0, 0.0, z), 0.0, Vec3::new(0.0, 0.0, z));
        let img = render_depth(&env, &camera);

        let row = 129 / 2;
        let hits: Vec<usize> = (0..129)
            .filter(|&j| (img.data[row * 129 + j] as f64) < 1.5)
            .collect();
        assert!(!hits.is_empty());
        let (first, last) = (hits[0], *hits.last().unwrap());

        // Face at x = -0.05 relative to camera at -1.0 => depth 0.95, half
        // width 0.05. Pixel u of the edge: u = (y / depth) / tan(fov/2).
        let tan_h = (camera.horizontal_fov / 2.0).tan();
        let edge_u = (0.05 / 0.95) / tan_h;
        let to_pixel = |u: f64| ((u + 1.0) / 2.0 * 129.0 - 0.5).round() as i64;
        assert!((first as i64 - to_pixel(-edge_u)).abs() <= 1);
        assert!((last as i64 - to_pixel(edge_u)).abs() <= 1);
    }

    #[test]
    fn binary_export_round_trips() {
        let img = DepthImage {
            width: 2,
            height: 2,
            near: 0.1,
            far: 5.0,
            data: vec![0.5, 1.5, 2.5, 5.0],
        };
        let mut buf = Vec::new();
        img.write_binary(&mut buf).unwrap();
        let header_end = buf.iter().position(|&b| b == b'\n').unwrap();
        let header = std::str::from_utf8(&buf[..header_end]).unwrap();
        assert_eq!(header, "2 2 0.1 5");
        let payload = &buf[header_end + 1..];
        assert_eq!(payload.len(), 16);
        let first = f32::from_le_bytes(payload[0..4].try_into().unwrap());
        assert_eq!(first, 0.5);
    }
}
