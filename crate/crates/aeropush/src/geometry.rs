//! Frames, rotations, and the small geometric kernel the rest of the
//! simulator consumes.
//!
//! World frame `W` is z-up. The vehicle body frame `B` and the arm frame `M`
//! share the same orientation; `M` is offset to the center of the exposed
//! arm. Euler angles use the intrinsic Z-Y-X convention (yaw, then pitch,
//! then roll).

use nalgebra::{Matrix3, Rotation3, Vector3};

pub type Vec3 = Vector3<f64>;
pub type Rotation = Rotation3<f64>;

pub const E3: Vec3 = Vec3::new(0.0, 0.0, 1.0);

/// Intrinsic Z-Y-X rotation from (roll, pitch, yaw).
pub fn rotation_from_euler(roll: f64, pitch: f64, yaw: f64) -> Rotation {
    // nalgebra's from_euler_angles builds Rz(yaw) * Ry(pitch) * Rx(roll).
    Rotation::from_euler_angles(roll, pitch, yaw)
}

/// Tilt metric `d_q = |1 - e3^T R e3|`, in [0, 2]. Zero iff the body z-axis
/// is parallel to the world z-axis; invariant under pure yaw.
pub fn tilt_metric(rotation: &Rotation) -> f64 {
    (1.0 - rotation.matrix()[(2, 2)]).abs()
}

/// Unit direction and distance from one point to another. A coincident pair
/// maps to the zero vector rather than an error so downstream rewards stay
/// finite.
pub fn direction_and_distance(from: &Vec3, to: &Vec3) -> (Vec3, f64) {
    let offset = to - from;
    let dist = offset.norm();
    if dist < 1e-9 {
        (Vec3::zeros(), 0.0)
    } else {
        (offset / dist, dist)
    }
}

/// Planar (x, y) distance between two points.
pub fn planar_distance(a: &Vec3, b: &Vec3) -> f64 {
    ((a.x - b.x).powi(2) + (a.y - b.y).powi(2)).sqrt()
}

pub fn is_orthonormal(m: &Matrix3<f64>, tol: f64) -> bool {
    let identity_err = (m * m.transpose() - Matrix3::identity()).norm();
    identity_err < tol && (m.determinant() - 1.0).abs() < tol
}
