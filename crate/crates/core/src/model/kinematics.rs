//! Serial-chain kinematics of the five-body gantry hopper.
//!
//! World frame: Z up, ground is the plane z = 0, the gantry post stands on
//! the origin. With q = 0 the gantry arm points along +Y and both leg links
//! hang straight down. Joint angles are unwrapped reals.
//!
//! Joint axes:
//! - θ1 gantry yaw about world Z through the pivot,
//! - θ2 gantry pitch about the post's X axis,
//! - θ3 hip and θ4 knee, both about the arm direction (link 2 Y axis).
//!
//! The hip heading frame H has its origin at the hip, Z_H vertical, X_H along
//! the arm projected on the ground (radial) and Y_H tangential, pointing in
//! the direction of increasing θ1. Stance forces and foot targets are
//! expressed in H.

use std::f64::consts::FRAC_PI_2;
use std::ops::Mul;

use nalgebra::{Matrix3, Matrix3x4, Vector3, Vector4};

use super::params::RobotParams;

pub type JointVector = Vector4<f64>;

/// Joint configuration and velocity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointState {
    pub q: JointVector,
    pub qdot: JointVector,
}

impl JointState {
    pub fn new(q: JointVector, qdot: JointVector) -> Self {
        Self { q, qdot }
    }

    pub fn at_rest(q: JointVector) -> Self {
        Self {
            q,
            qdot: JointVector::zeros(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.q.iter().chain(self.qdot.iter()).all(|v| v.is_finite())
    }
}

/// Rigid transform: x_world = rotation * x_local + translation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transform {
    pub rotation: Matrix3<f64>,
    pub translation: Vector3<f64>,
}

impl Transform {
    pub fn identity() -> Self {
        Self {
            rotation: Matrix3::identity(),
            translation: Vector3::zeros(),
        }
    }

    pub fn new(rotation: Matrix3<f64>, translation: Vector3<f64>) -> Self {
        Self {
            rotation,
            translation,
        }
    }

    pub fn apply(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.rotation * p + self.translation
    }

    /// Largest entry of RᵀR − I.
    pub fn orthonormality_error(&self) -> f64 {
        (self.rotation.transpose() * self.rotation - Matrix3::identity())
            .abs()
            .max()
    }
}

impl Mul for Transform {
    type Output = Transform;

    fn mul(self, rhs: Transform) -> Transform {
        Transform {
            rotation: self.rotation * rhs.rotation,
            translation: self.rotation * rhs.translation + self.translation,
        }
    }
}

pub fn rot_x(a: f64) -> Matrix3<f64> {
    let (s, c) = a.sin_cos();
    Matrix3::new(1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c)
}

pub fn rot_y(a: f64) -> Matrix3<f64> {
    let (s, c) = a.sin_cos();
    Matrix3::new(c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c)
}

pub fn rot_z(a: f64) -> Matrix3<f64> {
    let (s, c) = a.sin_cos();
    Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
}

/// Rotation of the hip heading frame for a given gantry yaw.
pub fn heading_rotation(yaw: f64) -> Matrix3<f64> {
    rot_z(yaw + FRAC_PI_2)
}

/// Every frame quantity of the chain at one configuration.
#[derive(Debug, Clone, Copy)]
pub struct ChainFrames {
    /// World pose of base, yaw post, arm, upper leg, lower leg.
    pub bodies: [Transform; 5],
    /// World direction of each joint axis.
    pub axes: [Vector3<f64>; 4],
    /// A world point on each joint axis.
    pub axis_points: [Vector3<f64>; 4],
    pub hip: Vector3<f64>,
    pub knee: Vector3<f64>,
    pub foot: Vector3<f64>,
}

impl ChainFrames {
    pub fn new(params: &RobotParams, q: &JointVector) -> Self {
        let base = Transform::identity();
        let post = Transform::new(
            rot_z(q[0]),
            Vector3::new(0.0, 0.0, params.gantry_pivot_height),
        );
        let arm = post * Transform::new(rot_x(q[1]), Vector3::zeros());
        let hip = arm.apply(&Vector3::new(0.0, params.gantry_arm_length, 0.0));
        let upper = Transform::new(arm.rotation * rot_y(q[2]), hip);
        let knee = upper.apply(&Vector3::new(0.0, 0.0, -params.link3_length));
        let lower = Transform::new(upper.rotation * rot_y(q[3]), knee);
        let foot = lower.apply(&Vector3::new(0.0, 0.0, -params.link4_length));

        Self {
            bodies: [base, post, arm, upper, lower],
            axes: [
                Vector3::z(),
                post.rotation * Vector3::x(),
                arm.rotation * Vector3::y(),
                upper.rotation * Vector3::y(),
            ],
            axis_points: [post.translation, post.translation, hip, knee],
            hip,
            knee,
            foot,
        }
    }

    /// Jacobian of a world point rigidly attached to `body` (1..=4).
    pub fn point_jacobian(&self, body: usize, p: &Vector3<f64>) -> Matrix3x4<f64> {
        let mut jac = Matrix3x4::zeros();
        for j in 0..body.min(4) {
            jac.set_column(j, &self.axes[j].cross(&(p - self.axis_points[j])));
        }
        jac
    }

    /// Angular velocity Jacobian of `body` (columns are the joint axes it
    /// depends on).
    pub fn angular_jacobian(&self, body: usize) -> Matrix3x4<f64> {
        let mut jac = Matrix3x4::zeros();
        for j in 0..body.min(4) {
            jac.set_column(j, &self.axes[j]);
        }
        jac
    }

    /// Time derivative of [`point_jacobian`](Self::point_jacobian) along qdot.
    pub fn point_jacobian_dot(
        &self,
        body: usize,
        p: &Vector3<f64>,
        qdot: &JointVector,
    ) -> Matrix3x4<f64> {
        let v_p = self.point_jacobian(body, p) * qdot;
        let mut jdot = Matrix3x4::zeros();
        for j in 0..body.min(4) {
            // axis j is fixed in body j
            let omega = self.angular_jacobian(j) * qdot;
            let axis_dot = omega.cross(&self.axes[j]);
            let v_o = self.point_jacobian(j, &self.axis_points[j]) * qdot;
            let col = axis_dot.cross(&(p - self.axis_points[j])) + self.axes[j].cross(&(v_p - v_o));
            jdot.set_column(j, &col);
        }
        jdot
    }

    pub fn heading(&self) -> Matrix3<f64> {
        self.bodies[1].rotation * rot_z(FRAC_PI_2)
    }
}

/// World pose of each of the five bodies; the base pose is the identity.
pub fn forward_kinematics(params: &RobotParams, q: &JointVector) -> [Transform; 5] {
    ChainFrames::new(params, q).bodies
}

pub fn foot_position(params: &RobotParams, q: &JointVector) -> Vector3<f64> {
    ChainFrames::new(params, q).foot
}

pub fn hip_position(params: &RobotParams, q: &JointVector) -> Vector3<f64> {
    ChainFrames::new(params, q).hip
}

/// J_c with foot world velocity = J_c q̇.
pub fn contact_jacobian(params: &RobotParams, q: &JointVector) -> Matrix3x4<f64> {
    let f = ChainFrames::new(params, q);
    f.point_jacobian(4, &f.foot)
}

pub fn contact_jacobian_dot(
    params: &RobotParams,
    q: &JointVector,
    qdot: &JointVector,
) -> Matrix3x4<f64> {
    let f = ChainFrames::new(params, q);
    f.point_jacobian_dot(4, &f.foot, qdot)
}

/// Foot position relative to the hip, expressed in the hip heading frame.
pub fn foot_in_hip_frame(params: &RobotParams, q: &JointVector) -> Vector3<f64> {
    let f = ChainFrames::new(params, q);
    f.heading().transpose() * (f.foot - f.hip)
}

/// Leg angles (θ3, θ4) placing the foot at (y, z) in the hip heading frame
/// with the gantry arm level. Returns the branch with θ4 ≤ 0, or `None` when
/// the target is out of reach.
pub fn leg_inverse_kinematics(params: &RobotParams, y: f64, z: f64) -> Option<(f64, f64)> {
    let (l3, l4) = (params.link3_length, params.link4_length);
    let r2 = y * y + z * z;
    let c = (r2 - l3 * l3 - l4 * l4) / (2.0 * l3 * l4);
    if !(-1.0..=1.0).contains(&c) {
        return None;
    }
    let knee = -c.acos();
    let hip = y.atan2(-z) - (l4 * knee.sin()).atan2(l3 + l4 * knee.cos());
    Some((hip, knee))
}
